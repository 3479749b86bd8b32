#include "gpfractal/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>

#include "gpfractal/errors.hpp"
#include "gpfractal/numerics.hpp"

namespace gpfractal {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t occupied_boxes(std::span<const double> pts, std::size_t dim, std::span<const double> lo, double s,
                           std::vector<std::int64_t>& keys, std::vector<std::size_t>& order) {
  const std::size_t n = pts.size() / dim;
  keys.resize(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < dim; ++k) keys[i * dim + k] = static_cast<std::int64_t>(std::floor((pts[i * dim + k] - lo[k]) / s));
  }
  order.resize(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto less = [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(keys.begin() + a * dim, keys.begin() + (a + 1) * dim, keys.begin() + b * dim,
                                        keys.begin() + (b + 1) * dim);
  };
  std::sort(order.begin(), order.end(), less);
  std::size_t count = n > 0 ? 1 : 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (less(order[i - 1], order[i])) ++count;
  }
  return count;
}

// Fits log₂ count against x over counts[first..last].
void fit_window(DimensionEstimate& est, std::span<const double> x, std::size_t first, std::size_t last) {
  std::vector<double> xs(x.begin() + first, x.begin() + last + 1);
  std::vector<double> ys;
  for (std::size_t i = first; i <= last; ++i) ys.push_back(est.counts[i].log2_count);
  const auto fit = numerics::fit_line(xs, ys);
  est.value = std::max(0.0, fit.slope);
  est.std_error = fit.slope_stderr;
  est.fit_first = first;
  est.fit_last = last;
  est.scale_max = est.counts[first].scale;
  est.scale_min = est.counts[last].scale;
}

// Super-geometric growth: per-level increments keep rising and at least double overall.
bool looks_divergent(std::span<const double> y) {
  if (y.size() < 4) return false;
  std::vector<double> inc;
  for (std::size_t i = 1; i < y.size(); ++i) inc.push_back(y[i] - y[i - 1]);
  for (std::size_t i = 1; i < inc.size(); ++i) {
    if (inc[i] < inc[i - 1] * (1.0 - 1e-6)) return false;
  }
  return inc.back() > 2.0 * std::max(inc.front(), 1e-9);
}

DimensionEstimate dyadic_fit(std::vector<int> levels, const std::function<double(int)>& log2_count, DimMethod method) {
  DimensionEstimate est;
  est.method = method;
  std::vector<double> xs;
  for (int n : levels) {
    double y;
    try {
      y = log2_count(n);
    } catch (const NumericalError&) {
      break;  // tiles finer than the index range
    }
    if (!std::isfinite(y)) break;
    est.counts.push_back({std::ldexp(1.0, -n), y});
    xs.push_back(n);
  }
  if (est.counts.size() < 4) throw DomainError("dimension: fewer than 4 usable levels");
  std::vector<double> ys;
  for (const auto& c : est.counts) ys.push_back(c.log2_count);
  fit_window(est, xs, 0, est.counts.size() - 1);
  if (looks_divergent(ys)) {
    est.divergent = true;
    est.value = std::numeric_limits<double>::infinity();
  }
  return est;
}

std::vector<int> default_interval_levels(const ScaleFunction& f) {
  std::vector<int> levels;
  const double log_top = std::log(f.eval(f.x_max()));
  for (int n = 4; n <= 24; ++n) {
    if (-n * std::numbers::ln2 <= log_top) levels.push_back(n);
  }
  return levels;
}

std::vector<int> default_cantor_levels(const CantorSet& E) {
  std::vector<int> levels;
  const int top = static_cast<int>(std::floor(E.depth() / E.zeta()));
  for (int n = 2; n <= top; ++n) levels.push_back(n);
  return levels;
}

}  // namespace

DimensionEstimate box_dimension_euclidean(std::span<const double> points, std::size_t dim, const BoxCountOptions& opt) {
  if (dim == 0 || points.size() % dim != 0 || points.empty()) throw DomainError("box counting: bad point array");
  const std::size_t n = points.size() / dim;
  DimensionEstimate est;
  est.method = DimMethod::BoxEuclidean;
  std::vector<double> lo(dim, std::numeric_limits<double>::infinity()), hi(dim, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < dim; ++k) {
      lo[k] = std::min(lo[k], points[i * dim + k]);
      hi[k] = std::max(hi[k], points[i * dim + k]);
    }
  }
  double extent = 0.0;
  for (std::size_t k = 0; k < dim; ++k) extent = std::max(extent, hi[k] - lo[k]);
  // Widen slightly so the top corner falls in the last box rather than one past it.
  extent *= 1.0 + 1e-9;
  if (extent == 0.0) {
    est.counts.push_back({1.0, 0.0});
    return est;
  }
  if (n < opt.min_points) throw DomainError("box counting needs at least " + std::to_string(opt.min_points) + " points");

  std::vector<std::int64_t> keys;
  std::vector<std::size_t> order;
  if (opt.scales.empty()) {
    for (int k = 0; k <= 60; ++k) {
      const double s = std::ldexp(extent, -k);
      const std::size_t c = occupied_boxes(points, dim, lo, s, keys, order);
      est.counts.push_back({s, std::log2(static_cast<double>(c))});
      if (2 * c >= n) break;
    }
  } else {
    std::vector<double> scales = opt.scales;
    std::sort(scales.begin(), scales.end(), std::greater<>());
    for (double s : scales) {
      if (!(s > 0.0)) throw DomainError("box counting: scales must be positive");
      est.counts.push_back({s, std::log2(static_cast<double>(occupied_boxes(points, dim, lo, s, keys, order)))});
    }
  }
  const std::size_t m = est.counts.size();
  int drop_c = opt.drop_coarse, drop_f = opt.drop_fine;
  while (static_cast<int>(m) - drop_c - drop_f < 4 && (drop_c > 0 || drop_f > 0)) {
    if (drop_c >= drop_f) {
      --drop_c;
    } else {
      --drop_f;
    }
  }
  if (static_cast<int>(m) - drop_c - drop_f < 2) throw DomainError("box counting: too few scales");
  std::vector<double> xs;
  for (const auto& c : est.counts) xs.push_back(-std::log2(c.scale));
  fit_window(est, xs, static_cast<std::size_t>(drop_c), m - 1 - static_cast<std::size_t>(drop_f));
  return est;
}

DimensionEstimate dim_delta_estimate(const IntervalUnion& E, const ScaleFunction& f, std::span<const int> levels) {
  std::vector<int> lv(levels.begin(), levels.end());
  if (lv.empty()) lv = default_interval_levels(f);
  return dyadic_fit(lv, [&](int n) { return gamma_dyadic_log2_count(E, n, f); }, DimMethod::GammaDyadic);
}

DimensionEstimate dim_delta_estimate(const CantorSet& E, std::span<const int> levels) {
  std::vector<int> lv(levels.begin(), levels.end());
  if (lv.empty()) lv = default_cantor_levels(E);
  return dyadic_fit(lv, [&](int n) { return std::log2(static_cast<double>(gamma_dyadic_cover(E, n).count())); },
                    DimMethod::GammaDyadic);
}

DimensionEstimate dim_delta_estimate(const TimeSet& E, const ScaleFunction& f, std::span<const int> levels) {
  if (const auto* c = std::get_if<CantorSet>(&E)) return dim_delta_estimate(*c, levels);
  return dim_delta_estimate(std::get<IntervalUnion>(E), f, levels);
}

DimensionEstimate dim_rho_product(const TimeSet& E, const SpatialSet& F, const ScaleFunction& f, std::span<const int> levels) {
  std::vector<int> lv(levels.begin(), levels.end());
  const auto* cantor = std::get_if<CantorSet>(&E);
  if (lv.empty()) lv = cantor ? default_cantor_levels(*cantor) : default_interval_levels(f);
  auto time_count = [&](int n) {
    if (cantor) return std::log2(static_cast<double>(gamma_dyadic_cover(*cantor, n).count()));
    return gamma_dyadic_log2_count(std::get<IntervalUnion>(E), n, f);
  };
  return dyadic_fit(lv, [&](int n) { return time_count(n) + std::log2(F.box_count(std::ldexp(1.0, -n))); },
                    DimMethod::ProductRho);
}

std::vector<double> time_grid(const TimeSet& E, std::size_t grid_n) {
  if (const auto* c = std::get_if<CantorSet>(&E)) {
    if (c->depth() > 13) throw DomainError("time_grid: Cantor depth above 13 exceeds the 8192-point grid cap");
    if (!(c->origin() >= 0.0)) throw DomainError("time_grid: Cantor set must lie in t >= 0");
    return cantor_measure(*c).coords;
  }
  const auto& parts = std::get<IntervalUnion>(E).parts;
  if (parts.empty()) throw DomainError("time_grid: empty set");
  if (grid_n < parts.size()) throw DomainError("time_grid: fewer grid points than parts");
  double total = 0.0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!(parts[i].left > 0.0) || parts[i].right < parts[i].left) throw DomainError("time_grid: parts must lie in t > 0");
    if (i > 0 && !(parts[i].left > parts[i - 1].right)) throw DomainError("time_grid: parts must be sorted and disjoint");
    total += parts[i].length();
  }
  std::vector<double> grid;
  std::size_t left = grid_n;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& p = parts[i];
    std::size_t k;
    if (p.length() == 0.0 || total == 0.0) {
      k = 1;
    } else if (i + 1 == parts.size()) {
      k = left;
    } else {
      k = std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(grid_n * p.length() / total)));
      k = std::min(k, left - (parts.size() - i - 1));
    }
    left -= k;
    if (k == 1) {
      grid.push_back(p.left);
    } else {
      const auto g = uniform_grid(p.left, p.right, k);
      grid.insert(grid.end(), g.begin(), g.end());
    }
  }
  return grid;
}

CovMatrix build_covariance(const ScaleFunction& f, std::span<const double> grid, CovKind kind) {
  return kind == CovKind::Volterra ? cov_volterra(f, grid, 64) : cov_stationary_increments(f, grid);
}

double regular_variation_index(const ScaleFunction& f) {
  const double hi = std::min(1e-2, f.x_max());
  const auto grid = numerics::log_spaced_decreasing(hi, hi * 1e-10, 41);
  return lower_index_report(f, grid).ind_lower;
}

ImageDimensionReport image_dimension_experiment(const ScaleFunction& f, const TimeSet& E, std::size_t d,
                                                std::size_t n_paths, std::size_t grid_n, std::uint64_t seed, CovKind kind) {
  if (d == 0 || n_paths == 0) throw DomainError("image experiment: d and n_paths must be positive");
  const auto grid = time_grid(E, grid_n);
  const auto cov = build_covariance(f, grid, kind);
  const PathSampler sampler(cov, d, seed);
  ImageDimensionReport rep;
  rep.d = d;
  rep.n_paths = n_paths;
  rep.grid_n = grid.size();
  rep.seed = seed;
  rep.per_path.assign(n_paths, kNaN);
  BoxCountOptions opt;
  opt.min_points = std::min<std::size_t>(1000, grid.size());
  const std::size_t stride = grid.size() * d;
  sampler.for_each_block(n_paths, [&](std::size_t first, std::size_t count, std::span<const double> v) {
    for (std::size_t p = 0; p < count; ++p) {
      rep.per_path[first + p] = box_dimension_euclidean(v.subspan(p * stride, stride), d, opt).value;
    }
  });
  double sum = 0.0, sq = 0.0;
  rep.min = std::numeric_limits<double>::infinity();
  rep.max = -std::numeric_limits<double>::infinity();
  for (double x : rep.per_path) {
    sum += x;
    sq += x * x;
    rep.min = std::min(rep.min, x);
    rep.max = std::max(rep.max, x);
  }
  rep.mean = sum / static_cast<double>(n_paths);
  rep.sd = n_paths > 1 ? std::sqrt(std::max(0.0, (sq - n_paths * rep.mean * rep.mean) / (n_paths - 1.0))) : 0.0;
  rep.dim_delta = dim_delta_estimate(E, f);
  rep.predicted = std::min(static_cast<double>(d), rep.dim_delta.value);
  return rep;
}

IntersectionReport intersection_dimension_experiment(const ScaleFunction& f, const TimeSet& E, const SpatialSet& F,
                                                     std::size_t d, std::size_t n_paths, double tol, std::uint64_t seed,
                                                     std::size_t grid_n, std::size_t min_points, CovKind kind) {
  if (F.dim() != d) throw DomainError("intersection experiment: F lives in the wrong dimension");
  if (F.empty()) throw DomainError("intersection experiment: F is empty");
  if (!(tol > 0.0)) throw DomainError("intersection experiment: tol must be positive");
  if (d == 0 || n_paths == 0) throw DomainError("intersection experiment: d and n_paths must be positive");
  const auto grid = time_grid(E, grid_n);
  const auto cov = build_covariance(f, grid, kind);
  const PathSampler sampler(cov, d, seed);
  const std::size_t n = grid.size();
  IntersectionReport rep;
  rep.d = d;
  rep.n_paths = n_paths;
  rep.grid_n = n;
  rep.tol = tol;
  rep.seed = seed;
  rep.hit.assign(n_paths, 0);
  rep.hit_points.assign(n_paths, 0);
  rep.dim_preimage.assign(n_paths, kNaN);
  rep.dim_image.assign(n_paths, kNaN);
  BoxCountOptions opt;
  opt.min_points = min_points;
  sampler.for_each_block(n_paths, [&](std::size_t first, std::size_t count, std::span<const double> v) {
    std::vector<double> times, image;
    for (std::size_t p = 0; p < count; ++p) {
      times.clear();
      image.clear();
      for (std::size_t i = 0; i < n; ++i) {
        const auto x = v.subspan((p * n + i) * d, d);
        if (F.distance(x) <= tol) {
          times.push_back(grid[i]);
          image.insert(image.end(), x.begin(), x.end());
        }
      }
      const std::size_t path = first + p;
      rep.hit[path] = times.empty() ? 0 : 1;
      rep.hit_points[path] = times.size();
      if (times.size() >= min_points) {
        rep.dim_preimage[path] = box_dimension_euclidean(times, 1, opt).value;
        rep.dim_image[path] = box_dimension_euclidean(image, d, opt).value;
      }
    }
  });
  std::size_t hits = 0;
  rep.max_dim_preimage = rep.max_dim_image = kNaN;
  for (std::size_t p = 0; p < n_paths; ++p) {
    hits += rep.hit[p];
    if (!std::isnan(rep.dim_preimage[p])) {
      rep.defined = true;
      rep.max_dim_preimage = std::isnan(rep.max_dim_preimage) ? rep.dim_preimage[p] : std::max(rep.max_dim_preimage, rep.dim_preimage[p]);
      rep.max_dim_image = std::isnan(rep.max_dim_image) ? rep.dim_image[p] : std::max(rep.max_dim_image, rep.dim_image[p]);
    }
  }
  rep.hit_rate = static_cast<double>(hits) / static_cast<double>(n_paths);

  rep.index_H = regular_variation_index(f);
  BoxCountOptions eopt;
  eopt.min_points = std::min<std::size_t>(1000, n);
  rep.dim_E = box_dimension_euclidean(grid, 1, eopt).value;
  rep.dim_F = F.dim_euclidean();
  rep.dim_rho = dim_rho_product(E, F, f).value;
  rep.lower_bound = rep.dim_E + rep.index_H * (rep.dim_F - static_cast<double>(d));
  rep.upper_bound = rep.index_H * (rep.dim_rho - static_cast<double>(d));
  return rep;
}

}  // namespace gpfractal
