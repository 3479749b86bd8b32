#include "gpfractal/fractal_sets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "gpfractal/errors.hpp"
#include "gpfractal/format.hpp"

namespace gpfractal {

namespace {

using Run = std::pair<std::int64_t, std::int64_t>;

std::vector<Run> merge_runs(std::vector<Run> runs) {
  std::sort(runs.begin(), runs.end());
  std::vector<Run> out;
  for (const auto& r : runs) {
    if (!out.empty() && r.first <= out.back().second + 1) {
      out.back().second = std::max(out.back().second, r.second);
    } else {
      out.push_back(r);
    }
  }
  return out;
}

double tile_width(int n, const ScaleFunction& f) {
  if (n < 0) throw DomainError("gamma-dyadic level must be >= 0");
  const double log_v = -n * std::numbers::ln2;
  if (log_v > std::log(f.eval(f.x_max()))) throw DomainError("gamma-dyadic level " + std::to_string(n) + " above gamma(x_max)");
  return std::exp(-f.log_inverse(log_v));
}

std::int64_t tile_of(double x, double w) { return static_cast<std::int64_t>(std::floor(x / w)) + 1; }

// Tiles [(j-1)w, jw) whose interior meets [l, r].
Run tiles_of(double l, double r, double w) {
  if (r <= l) return {tile_of(l, w), tile_of(l, w)};
  return {static_cast<std::int64_t>(std::floor(l / w)) + 1, static_cast<std::int64_t>(std::ceil(r / w))};
}

void check_tile_range(double x, double w) {
  if (!(w > 0.0) || std::abs(x / w) > 9e15) throw NumericalError("gamma-dyadic tiles too fine for 64-bit indices; use the log2 count");
}

double half_width(double r, const ScaleFunction& f) {
  if (r >= f.eval(f.x_max())) return f.x_max();
  return f.inverse(r, 1e-14 * r);
}

std::vector<double> sorted_copy(std::span<const double> points) {
  std::vector<double> p(points.begin(), points.end());
  std::sort(p.begin(), p.end());
  return p;
}

}  // namespace

Interval1 CantorSet::interval(int k, std::uint64_t j) const {
  if (k < 0 || k > depth_) throw DomainError("cantor: level out of range");
  if (k < 64 && j >= (std::uint64_t{1} << k)) throw DomainError("cantor: interval index out of range");
  double left = origin_;
  for (int i = 1; i <= k; ++i) {
    if ((j >> (k - i)) & 1U) left += shift_[i];
  }
  return {left, left + eps0_ * t_[k]};
}

std::vector<Interval1> CantorSet::level(int k) const {
  if (k < 0 || k > depth_) throw DomainError("cantor: level out of range");
  const std::uint64_t count = std::uint64_t{1} << k;
  if (count > kMaxMaterialized) throw DomainError("cantor: level " + std::to_string(k) + " too large to materialize");
  std::vector<Interval1> out;
  out.reserve(count);
  for (std::uint64_t j = 0; j < count; ++j) out.push_back(interval(k, j));
  return out;
}

CantorSet build_cantor(const ScaleFunction& f, double zeta, int depth, double eps0, double origin) {
  if (!(zeta > 0.0)) throw DomainError("cantor: zeta must be positive");
  if (depth < 0 || depth > CantorSet::kMaxDepth) throw DomainError("cantor: depth must lie in [0, 40]");
  if (!(eps0 > 0.0 && eps0 <= 1.0)) throw DomainError("cantor: eps0 must lie in (0, 1]");
  CantorSet set(f);
  set.zeta_ = zeta;
  set.depth_ = depth;
  set.eps0_ = eps0;
  set.origin_ = origin;
  set.t_.assign(1, 1.0);
  set.l_.assign(1, 1.0);
  set.shift_.assign(1, 0.0);
  const double log_top = std::log(f.eval(f.x_max()));
  for (int k = 1; k <= depth; ++k) {
    const double log_v = -(k / zeta) * std::numbers::ln2;
    if (log_v > log_top) {
      throw DomainError("cantor: 2^(-k/zeta) exceeds gamma(x_max) at level " + std::to_string(k));
    }
    const double t = std::exp(-f.log_inverse(log_v));
    if (!(t > 0.0) || !std::isnormal(t)) {
      throw NumericalError("cantor: t_" + std::to_string(k) + " underflows double precision");
    }
    const double l = t / set.t_.back();
    if (l > 0.5 * (1.0 + 1e-12)) {
      throw NumericalError("ratio overflow: l_" + std::to_string(k) + " = " + format_double(l) +
                           " > 1/2, the two children do not fit in their parent");
    }
    set.shift_.push_back(eps0 * (set.t_.back() - t));
    set.t_.push_back(t);
    set.l_.push_back(l);
  }
  return set;
}

void DiscreteMeasure::validate() const {
  if (dim == 0 || coords.size() != weights.size() * dim) throw DomainError("measure: coordinates do not match atoms");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw DomainError("measure: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw DomainError("measure: weights sum to " + format_double(sum));
}

DiscreteMeasure uniform_measure(std::span<const double> times) {
  if (times.empty()) throw DomainError("measure: no atoms");
  DiscreteMeasure m;
  m.dim = 1;
  m.coords.assign(times.begin(), times.end());
  m.weights.assign(times.size(), 1.0 / static_cast<double>(times.size()));
  return m;
}

DiscreteMeasure point_mass(std::span<const double> point) {
  DiscreteMeasure m;
  m.dim = point.size();
  m.coords.assign(point.begin(), point.end());
  m.weights = {1.0};
  return m;
}

DiscreteMeasure cantor_measure(const CantorSet& set) {
  const auto deepest = set.level(set.depth());
  DiscreteMeasure m;
  m.dim = 1;
  const double w = std::ldexp(1.0, -set.depth());
  for (const auto& iv : deepest) {
    m.coords.push_back(0.5 * (iv.left + iv.right));
    m.weights.push_back(w);
  }
  return m;
}

double time_ball_mass(const DiscreteMeasure& nu, double t, double r, const ScaleFunction& f) {
  if (nu.dim != 1) throw DomainError("time_ball_mass: measure must live on times");
  const double h = half_width(r, f);
  const auto lo = std::lower_bound(nu.coords.begin(), nu.coords.end(), t - h);
  const auto hi = std::upper_bound(nu.coords.begin(), nu.coords.end(), t + h);
  double mass = 0.0;
  for (auto it = lo; it != hi; ++it) mass += nu.weights[static_cast<std::size_t>(it - nu.coords.begin())];
  return mass;
}

std::uint64_t DyadicCover::count() const noexcept {
  std::uint64_t c = 0;
  for (const auto& r : runs) c += static_cast<std::uint64_t>(r.second - r.first + 1);
  return c;
}

std::vector<Interval1> DyadicCover::intervals() const {
  std::vector<Interval1> out;
  for (const auto& r : runs) {
    for (std::int64_t j = r.first; j <= r.second; ++j) out.push_back({(j - 1) * width, j * width});
  }
  return out;
}

DyadicCover gamma_dyadic_cover(std::span<const double> points, int n, const ScaleFunction& f) {
  DyadicCover cover;
  cover.level = n;
  cover.width = tile_width(n, f);
  std::vector<Run> runs;
  for (double x : sorted_copy(points)) {
    check_tile_range(x, cover.width);
    const auto j = tile_of(x, cover.width);
    runs.push_back({j, j});
  }
  cover.runs = merge_runs(std::move(runs));
  return cover;
}

DyadicCover gamma_dyadic_cover(const IntervalUnion& E, int n, const ScaleFunction& f) {
  DyadicCover cover;
  cover.level = n;
  cover.width = tile_width(n, f);
  std::vector<Run> runs;
  for (const auto& iv : E.parts) {
    check_tile_range(iv.right, cover.width);
    check_tile_range(iv.left, cover.width);
    runs.push_back(tiles_of(iv.left, iv.right, cover.width));
  }
  cover.runs = merge_runs(std::move(runs));
  return cover;
}

DyadicCover gamma_dyadic_cover(const CantorSet& E, int n) {
  DyadicCover cover;
  cover.level = n;
  cover.width = tile_width(n, E.scale());
  const double w = cover.width;
  check_tile_range(E.origin() + E.eps0(), w);
  std::vector<Run> runs;
  // Depth-first descent; a subtree inside a single tile contributes that tile only.
  struct Node {
    int k;
    std::uint64_t j;
  };
  std::vector<Node> stack{{0, 0}};
  while (!stack.empty()) {
    const Node node = stack.back();
    stack.pop_back();
    const Interval1 iv = E.interval(node.k, node.j);
    const Run r = tiles_of(iv.left, iv.right, w);
    if (r.first == r.second || node.k == E.depth()) {
      runs.push_back(r);
      continue;
    }
    stack.push_back({node.k + 1, 2 * node.j + 1});
    stack.push_back({node.k + 1, 2 * node.j});
  }
  cover.runs = merge_runs(std::move(runs));
  return cover;
}

double gamma_dyadic_log2_count(const IntervalUnion& E, int n, const ScaleFunction& f) {
  if (E.parts.empty()) throw DomainError("gamma_dyadic: empty set");
  const double L = f.log_inverse(-n * std::numbers::ln2);
  const double w = std::exp(-L);
  double extent = 0.0;
  for (const auto& iv : E.parts) extent = std::max(extent, std::max(std::abs(iv.left), std::abs(iv.right)));
  if (std::isnormal(w) && extent / w < 1e15) return std::log2(static_cast<double>(gamma_dyadic_cover(E, n, f).count()));
  // Tiles far finer than the parts: count ≈ Σ length / w (+ one per point).
  double total = 0.0;
  std::size_t points = 0;
  for (const auto& iv : E.parts) {
    if (iv.right > iv.left) {
      total += iv.length();
    } else {
      ++points;
    }
  }
  if (total == 0.0) return std::log2(static_cast<double>(points));
  return std::log2(total) + L / std::numbers::ln2;
}

std::size_t covering_number_delta(std::span<const double> points, double r, const MetricModel& model) {
  if (points.empty()) return 0;
  if (!(r > 0.0)) throw DomainError("covering: radius must be positive");
  const auto p = sorted_copy(points);
  std::size_t count = 0;
  if (const ScaleFunction* f = model.scale()) {
    const double span = 2.0 * half_width(r, *f);
    std::size_t i = 0;
    while (i < p.size()) {
      ++count;
      const double reach = p[i] + span;
      while (i < p.size() && p[i] <= reach) ++i;
    }
    return count;
  }
  const CovMatrix& cov = *model.covariance();
  std::vector<std::size_t> idx;
  for (double t : p) idx.push_back(cov.index_of(t));
  std::vector<bool> covered(idx.size(), false);
  std::size_t i = 0;
  while (i < idx.size()) {
    ++count;
    // Center: the furthest grid point to the right still within r of the leftmost uncovered point.
    std::size_t c = idx[i];
    while (c + 1 < cov.size() && model.delta_index(idx[i], c + 1) <= r) ++c;
    for (std::size_t k = i; k < idx.size(); ++k) {
      if (covered[k]) continue;
      if (model.delta_index(c, idx[k]) <= r) {
        covered[k] = true;
      } else if (idx[k] > c) {
        break;
      }
    }
    while (i < idx.size() && covered[i]) ++i;
  }
  return count;
}

std::size_t packing_number_delta(std::span<const double> points, double r, const MetricModel& model) {
  if (points.empty()) return 0;
  if (!(r > 0.0)) throw DomainError("packing: radius must be positive");
  const auto p = sorted_copy(points);
  std::size_t count = 1;
  if (const ScaleFunction* f = model.scale()) {
    const double gap = 2.0 * half_width(r, *f);
    double last = p.front();
    for (double t : p) {
      if (t - last > gap) {
        ++count;
        last = t;
      }
    }
    return count;
  }
  double last = p.front();
  for (double t : p) {
    if (model.delta(last, t) > 2.0 * r) {
      ++count;
      last = t;
    }
  }
  return count;
}

}  // namespace gpfractal
