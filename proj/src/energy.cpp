#include "gpfractal/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gpfractal/errors.hpp"
#include "gpfractal/numerics.hpp"

namespace gpfractal {

namespace {

double atom_distance(const MetricModel& model, std::span<const double> a, std::span<const double> b) {
  if (a.size() == 1) return model.delta(a[0], b[0]);
  return model.rho(a[0], a.subspan(1), b[0], b.subspan(1));
}

std::span<const double> atom_of(std::span<const double> atoms, std::size_t dim, std::size_t i) {
  return atoms.subspan(i * dim, dim);
}

}  // namespace

KernelMatrix::KernelMatrix(std::vector<double> atoms, std::size_t dim, const MetricModel& model, double beta, double h)
    : atoms_(std::move(atoms)), dim_(dim), n_(0), beta_(beta), h_(h) {
  if (dim_ == 0 || atoms_.empty() || atoms_.size() % dim_ != 0) throw DomainError("kernel: bad atom array");
  if (!(h_ > 0.0)) throw DomainError("kernel: resolution h must be positive");
  n_ = atoms_.size() / dim_;
  if (n_ > kMaxAtoms) throw DomainError("atom overflow: " + std::to_string(n_) + " atoms exceed " + std::to_string(kMaxAtoms));
  k_.assign(n_ * n_, 0.0);
  const std::span<const double> a(atoms_);
  const double diag = phi_kernel(beta_, h_);
  const auto n = static_cast<std::int64_t>(n_);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    try {
      k_[i * n_ + i] = diag;
      for (std::size_t j = i + 1; j < n_; ++j) {
        const double v = phi_kernel(beta_, std::max(atom_distance(model, atom_of(a, dim_, i), atom_of(a, dim_, j)), h_));
        k_[i * n_ + j] = v;
        k_[j * n_ + i] = v;
      }
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

KernelMatrix::KernelMatrix(std::vector<double> atoms, std::size_t dim, double beta, double h, std::vector<double> values)
    : atoms_(std::move(atoms)), dim_(dim), n_(0), beta_(beta), h_(h), k_(std::move(values)) {
  if (dim_ == 0 || atoms_.empty() || atoms_.size() % dim_ != 0) throw DomainError("kernel: bad atom array");
  n_ = atoms_.size() / dim_;
  if (n_ > kMaxAtoms) throw DomainError("atom overflow: " + std::to_string(n_) + " atoms exceed " + std::to_string(kMaxAtoms));
  if (k_.size() != n_ * n_) throw DomainError("kernel: value array does not match the atoms");
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (k_[i * n_ + j] != k_[j * n_ + i]) throw DomainError("kernel: values are not symmetric");
}

double energy_discrete(const DiscreteMeasure& measure, const KernelMatrix& kernel) {
  if (measure.dim != kernel.dim() || measure.size() != kernel.size() || measure.coords != kernel.atoms()) {
    throw DomainError("energy: measure atoms differ from kernel atoms");
  }
  double e = 0.0;
  for (std::size_t i = 0; i < kernel.size(); ++i) {
    if (measure.weights[i] == 0.0) continue;
    const auto row = kernel.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < kernel.size(); ++j) s += row[j] * measure.weights[j];
    e += measure.weights[i] * s;
  }
  return e;
}

EnergyMinimum minimize_energy(const KernelMatrix& kernel, double tol, int max_iter, bool record_trace) {
  if (!(tol >= 0.0)) throw DomainError("minimize_energy: tol must be nonnegative");
  if (max_iter < 0) throw DomainError("minimize_energy: max_iter must be nonnegative");
  const std::size_t n = kernel.size();
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  // u = K w, kept up to date incrementally.
  std::vector<double> u(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = kernel.row(i);
    u[i] = std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(n);
  }
  auto energy_of = [&] {
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) e += w[i] * u[i];
    return e;
  };
  EnergyMinimum out;
  double e = energy_of();
  double gap = 0.0;
  int it = 0;
  for (;; ++it) {
    const auto s = static_cast<std::size_t>(std::min_element(u.begin(), u.end()) - u.begin());
    gap = 2.0 * (e - u[s]);
    if (record_trace) out.trace.push_back({it, e, gap, false});
    if (gap <= tol * e || it >= max_iter) break;
    // Away vertex: largest gradient on the support.
    std::size_t v = s;
    double uv = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (w[i] > 0.0 && u[i] > uv) {
        uv = u[i];
        v = i;
      }
    }
    const double fw_slope = u[s] - e;   // ½ gᵀ(e_s - w)
    const double away_slope = e - u[v];  // ½ gᵀ(w - e_v)
    const bool away = away_slope < fw_slope && w[v] < 1.0;
    double slope, curv, lmax;
    std::size_t vertex;
    if (!away) {
      vertex = s;
      slope = fw_slope;
      curv = kernel(s, s) - 2.0 * u[s] + e;
      lmax = 1.0;
    } else {
      vertex = v;
      slope = away_slope;
      curv = e - 2.0 * u[v] + kernel(v, v);
      lmax = w[v] / (1.0 - w[v]);
    }
    double lambda = curv > 0.0 ? std::min(lmax, -slope / curv) : lmax;
    if (!(lambda > 0.0)) break;
    const auto col = kernel.row(vertex);
    if (!away) {
      for (std::size_t i = 0; i < n; ++i) {
        w[i] *= 1.0 - lambda;
        u[i] += lambda * (col[i] - u[i]);
      }
      w[s] += lambda;
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        w[i] *= 1.0 + lambda;
        u[i] += lambda * (u[i] - col[i]);
      }
      w[v] -= lambda;
      if (lambda == lmax || w[v] < 1e-300) w[v] = 0.0;
    }
    e = energy_of();
  }
  // Renormalize away rounding drift.
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
  out.measure.dim = kernel.dim();
  out.measure.coords = kernel.atoms();
  out.measure.weights = std::move(w);
  out.energy = energy_discrete(out.measure, kernel);
  out.gap = gap;
  out.iterations = it;
  return out;
}

std::string_view verdict_name(CapacityVerdict v) {
  switch (v) {
    case CapacityVerdict::Positive:
      return "positive";
    case CapacityVerdict::Zero:
      return "zero";
    case CapacityVerdict::Inconclusive:
      break;
  }
  return "inconclusive";
}

FarthestPointOrder farthest_point_order(std::span<const double> candidates, std::size_t dim, const MetricModel& model,
                                        double stop_radius) {
  if (dim == 0 || candidates.empty() || candidates.size() % dim != 0) throw DomainError("farthest point: bad atom array");
  const std::size_t n = candidates.size() / dim;
  FarthestPointOrder fp;
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::size_t next = 0;
  while (true) {
    fp.order.push_back(next);
    const auto c = atom_of(candidates, dim, next);
    double radius = 0.0;
    std::size_t arg = next;
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] = std::min(dist[i], atom_distance(model, atom_of(candidates, dim, i), c));
      if (dist[i] > radius) {
        radius = dist[i];
        arg = i;
      }
    }
    fp.radii.push_back(radius);
    if (radius <= stop_radius || fp.order.size() == n) break;
    next = arg;
  }
  return fp;
}

std::vector<double> product_candidates(std::span<const double> times, const SpatialSet& F, double h_space) {
  const auto pts = F.sample(h_space);
  const std::size_t d = F.dim();
  std::vector<double> out;
  out.reserve(times.size() * (pts.size() / d) * (d + 1));
  for (double t : times) {
    for (std::size_t p = 0; p < pts.size(); p += d) {
      out.push_back(t);
      out.insert(out.end(), pts.begin() + static_cast<std::ptrdiff_t>(p), pts.begin() + static_cast<std::ptrdiff_t>(p + d));
    }
  }
  return out;
}

CapacityReport capacity_estimate(std::span<const double> candidates, std::size_t dim, const MetricModel& model, double beta,
                                 std::span<const double> resolutions, const CapacityOptions& opt) {
  if (resolutions.size() < 3) throw DomainError("capacity: need at least 3 resolutions");
  for (std::size_t i = 0; i < resolutions.size(); ++i) {
    if (!(resolutions[i] > 0.0)) throw DomainError("capacity: resolutions must be positive");
    if (i > 0 && !(resolutions[i] < resolutions[i - 1])) throw DomainError("capacity: resolutions must decrease");
  }
  if (dim == 0 || candidates.size() % dim != 0) throw DomainError("capacity: bad atom array");
  if (candidates.size() / dim > opt.max_candidates) {
    throw DomainError("atom overflow: " + std::to_string(candidates.size() / dim) + " candidates exceed " +
                      std::to_string(opt.max_candidates));
  }
  const auto fp = farthest_point_order(candidates, dim, model, resolutions.back());
  CapacityReport rep;
  rep.beta = beta;
  rep.resolutions.assign(resolutions.begin(), resolutions.end());
  for (double h : resolutions) {
    // Smallest prefix whose covering radius is at most h.
    std::size_t m = 0;
    while (m < fp.radii.size() && fp.radii[m] > h) ++m;
    m = std::min(m + 1, fp.order.size());
    if (m > KernelMatrix::kMaxAtoms) {
      throw DomainError("atom overflow: resolution " + std::to_string(h) + " needs " + std::to_string(m) + " atoms");
    }
    std::vector<std::size_t> idx(fp.order.begin(), fp.order.begin() + static_cast<std::ptrdiff_t>(m));
    std::sort(idx.begin(), idx.end());
    std::vector<double> atoms;
    atoms.reserve(m * dim);
    for (std::size_t i : idx) {
      const auto a = atom_of(candidates, dim, i);
      atoms.insert(atoms.end(), a.begin(), a.end());
    }
    const KernelMatrix K(std::move(atoms), dim, model, beta, h);
    auto res = minimize_energy(K, opt.tol, opt.max_iter, opt.record_trace);
    rep.atoms.push_back(m);
    rep.e_min.push_back(res.energy);
    rep.gaps.push_back(res.gap);
    rep.iterations.push_back(res.iterations);
    rep.capacity.push_back(1.0 / res.energy);
    if (opt.record_trace) rep.traces.push_back(std::move(res.trace));
  }

  classify_capacity(rep);
  return rep;
}

void classify_capacity(CapacityReport& rep) {
  const std::size_t K = rep.e_min.size();
  if (K < 3 || rep.resolutions.size() != K) throw DomainError("capacity: need at least 3 resolutions");
  std::vector<double> oct, lcap;
  for (std::size_t i = K - 3; i < K; ++i) {
    oct.push_back(-std::log2(rep.resolutions[i]));
    lcap.push_back(std::log2(1.0 / rep.e_min[i]));
  }
  rep.decay_slope = numerics::fit_line(oct, lcap).slope;
  const double e0 = rep.e_min[K - 3], e1 = rep.e_min[K - 2], e2 = rep.e_min[K - 1];
  const double d1 = e1 - e0, d2 = e2 - e1;
  const double step = std::log2(rep.resolutions[K - 2] / rep.resolutions[K - 1]);
  rep.verdict = CapacityVerdict::Inconclusive;
  rep.convergence_order = std::numeric_limits<double>::quiet_NaN();
  rep.extrapolated = std::numeric_limits<double>::quiet_NaN();
  if (d1 > 0.0 && d2 > 0.0) rep.convergence_order = std::log2(d1 / d2) / step;
  if (d2 <= 1e-9 * e2) {
    rep.verdict = CapacityVerdict::Positive;
    rep.extrapolated = 1.0 / e2;
  } else if (rep.convergence_order > 0.2) {
    rep.verdict = CapacityVerdict::Positive;
    const double ratio = std::exp2(rep.convergence_order * step);
    rep.extrapolated = 1.0 / (e2 + d2 / (ratio - 1.0));
  } else if (rep.decay_slope < -0.1) {
    rep.verdict = CapacityVerdict::Zero;
    rep.extrapolated = 0.0;
  }
}

CapacityReport product_capacity_estimate(std::span<const double> times, std::span<const double> points, std::size_t d,
                                         const MetricModel& model, double beta, std::span<const double> resolutions,
                                         const CapacityOptions& opt) {
  if (resolutions.size() < 3) throw DomainError("capacity: need at least 3 resolutions");
  for (std::size_t i = 0; i < resolutions.size(); ++i) {
    if (!(resolutions[i] > 0.0)) throw DomainError("capacity: resolutions must be positive");
    if (i > 0 && !(resolutions[i] < resolutions[i - 1])) throw DomainError("capacity: resolutions must decrease");
  }
  if (d == 0 || points.empty() || points.size() % d != 0) throw DomainError("capacity: bad point array");
  if (times.size() > opt.max_candidates) throw DomainError("atom overflow: too many candidate times");
  const std::size_t np = points.size() / d;
  std::vector<double> pair;
  pair.reserve(np * np);
  for (std::size_t j = 0; j < np; ++j)
    for (std::size_t l = 0; l < np; ++l) pair.push_back(euclidean_distance(points.subspan(j * d, d), points.subspan(l * d, d)));
  std::sort(pair.begin(), pair.end());
  const auto fp = farthest_point_order(times, 1, model, resolutions.back());
  CapacityReport rep;
  rep.beta = beta;
  rep.resolutions.assign(resolutions.begin(), resolutions.end());
  for (double h : resolutions) {
    // suffix[k] = Σ_{m >= k} φ_β(pair[m]) for the pairs beyond the truncation level.
    std::vector<double> suffix(pair.size() + 1, 0.0);
    for (std::size_t k = pair.size(); k-- > 0;) suffix[k] = suffix[k + 1] + phi_kernel(beta, std::max(pair[k], h));
    auto mean_kernel = [&](double a) {
      const double m = std::max(a, h);
      const auto k = static_cast<std::size_t>(std::upper_bound(pair.begin(), pair.end(), m) - pair.begin());
      return (static_cast<double>(k) * phi_kernel(beta, m) + suffix[k]) / static_cast<double>(pair.size());
    };
    std::size_t m = 0;
    while (m < fp.radii.size() && fp.radii[m] > h) ++m;
    m = std::min(m + 1, fp.order.size());
    std::vector<std::size_t> idx(fp.order.begin(), fp.order.begin() + static_cast<std::ptrdiff_t>(m));
    std::sort(idx.begin(), idx.end());
    std::vector<double> atoms;
    for (std::size_t i : idx) atoms.push_back(times[i]);
    std::vector<double> values(m * m);
    for (std::size_t i = 0; i < m; ++i) {
      values[i * m + i] = mean_kernel(0.0);
      for (std::size_t j = 0; j < i; ++j) values[i * m + j] = values[j * m + i] = mean_kernel(model.delta(atoms[i], atoms[j]));
    }
    const KernelMatrix K(std::move(atoms), 1, beta, h, std::move(values));
    auto res = minimize_energy(K, opt.tol, opt.max_iter, opt.record_trace);
    rep.atoms.push_back(m);
    rep.e_min.push_back(res.energy);
    rep.gaps.push_back(res.gap);
    rep.iterations.push_back(res.iterations);
    rep.capacity.push_back(1.0 / res.energy);
    if (opt.record_trace) rep.traces.push_back(std::move(res.trace));
  }
  classify_capacity(rep);
  return rep;
}

FrostmanReport frostman_exponent(const DiscreteMeasure& measure, const MetricModel& model) {
  measure.validate();
  const std::size_t n = measure.size();
  const std::span<const double> coords(measure.coords);
  // Per atom: distances to all atoms, sorted, with cumulative mass.
  std::vector<std::vector<std::pair<double, double>>> shells(n);
  double r_min = std::numeric_limits<double>::infinity(), r_max = 0.0;
  const auto nn = static_cast<std::int64_t>(n);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 8) reduction(min : r_min) reduction(max : r_max)
  for (std::int64_t ii = 0; ii < nn; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    try {
      auto& sh = shells[i];
      sh.reserve(n);
      for (std::size_t j = 0; j < n; ++j) {
        const double dist = i == j ? 0.0 : atom_distance(model, atom_of(coords, measure.dim, i), atom_of(coords, measure.dim, j));
        sh.emplace_back(dist, measure.weights[j]);
        if (dist > 0.0) r_min = std::min(r_min, dist);
        r_max = std::max(r_max, dist);
      }
      std::sort(sh.begin(), sh.end());
      double acc = 0.0;
      for (auto& [dist, w] : sh) {
        acc += w;
        w = acc;
      }
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  FrostmanReport rep;
  if (r_max == 0.0) {
    rep.c1 = rep.c2 = 1.0;
    return rep;
  }
  const double hi = 0.5 * r_max, lo = std::min(2.0 * r_min, 0.25 * r_max);
  const auto octaves = static_cast<std::size_t>(std::floor(std::log2(hi / lo)));
  rep.radii = numerics::log_spaced_decreasing(hi, lo, std::max<std::size_t>(4, octaves + 1));
  std::sort(rep.radii.begin(), rep.radii.end(), std::greater<>());

  auto mass = [&](std::size_t i, double r) {
    const auto& sh = shells[i];
    const auto it = std::upper_bound(sh.begin(), sh.end(), std::make_pair(r, std::numeric_limits<double>::infinity()));
    return it == sh.begin() ? 0.0 : std::prev(it)->second;
  };
  std::vector<double> lr;
  for (double r : rep.radii) {
    double sup = 0.0;
    for (std::size_t i = 0; i < n; ++i) sup = std::max(sup, mass(i, r));
    rep.log2_sup_mass.push_back(std::log2(sup));
    lr.push_back(std::log2(r));
  }
  const auto fit = numerics::fit_line(lr, rep.log2_sup_mass);
  rep.exponent = fit.slope;
  rep.std_error = fit.slope_stderr;
  rep.c1 = std::numeric_limits<double>::infinity();
  rep.c2 = 0.0;
  for (double r : rep.radii) {
    const double scale = std::pow(r, rep.exponent);
    for (std::size_t i = 0; i < n; ++i) {
      const double ratio = mass(i, r) / scale;
      rep.c1 = std::min(rep.c1, ratio);
      rep.c2 = std::max(rep.c2, ratio);
    }
  }
  return rep;
}

}  // namespace gpfractal
