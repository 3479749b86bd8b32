#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "gpfractal/metrics.hpp"
#include "gpfractal/scale.hpp"

namespace gpfractal {

struct Interval1 {
  double left = 0.0;
  double right = 0.0;
  double length() const noexcept { return right - left; }
};

/// Finite union of closed time intervals (degenerate intervals are points).
struct IntervalUnion {
  std::vector<Interval1> parts;
};

/// Two-interval Cantor construction with δ*-dimension ζ. Level k consists of 2^k intervals of
/// length t_k·eps0, t_k = γ⁻¹(2^{-k/ζ}); children sit at both ends of their parent.
/// Intervals are generated on demand from their index, so deep levels cost nothing to hold.
class CantorSet {
 public:
  static constexpr int kMaxDepth = 40;
  static constexpr std::size_t kMaxMaterialized = std::size_t{1} << 24;

  const ScaleFunction& scale() const noexcept { return f_; }
  double zeta() const noexcept { return zeta_; }
  int depth() const noexcept { return depth_; }
  double eps0() const noexcept { return eps0_; }
  double origin() const noexcept { return origin_; }
  /// t_0 = 1, t_k for k = 1..depth.
  const std::vector<double>& t_seq() const noexcept { return t_; }
  /// l_k = t_k / t_{k-1}; l_seq()[0] is unused (1).
  const std::vector<double>& l_seq() const noexcept { return l_; }

  /// j-th interval of level k, j in [0, 2^k), left to right.
  Interval1 interval(int k, std::uint64_t j) const;
  /// All 2^k intervals of level k (DomainError above kMaxMaterialized).
  std::vector<Interval1> level(int k) const;

 private:
  friend CantorSet build_cantor(const ScaleFunction&, double, int, double, double);
  CantorSet(ScaleFunction f) : f_(std::move(f)) {}

  ScaleFunction f_;
  double zeta_ = 1.0;
  int depth_ = 0;
  double eps0_ = 1.0;
  double origin_ = 0.0;
  std::vector<double> t_;
  std::vector<double> l_;
  // Offsets eps0·(t_{k-1} - t_k) of the right child at level k.
  std::vector<double> shift_;
};

/// DomainError for bad arguments; NumericalError "ratio overflow" if some l_k > 1/2.
CantorSet build_cantor(const ScaleFunction& f, double zeta, int depth, double eps0 = 1.0, double origin = 0.0);

/// Atoms with weights. coords is row-major with `dim` entries per atom; for time×space
/// measures the first coordinate is time.
struct DiscreteMeasure {
  std::size_t dim = 1;
  std::vector<double> coords;
  std::vector<double> weights;

  std::size_t size() const noexcept { return weights.size(); }
  std::span<const double> atom(std::size_t i) const { return {coords.data() + i * dim, dim}; }
  /// Throws DomainError unless weights are >= 0 and sum to 1 within 1e-12.
  void validate() const;
};

DiscreteMeasure uniform_measure(std::span<const double> times);
DiscreteMeasure point_mass(std::span<const double> point);

/// Midpoints of the deepest intervals, weight 2^-depth each.
DiscreteMeasure cantor_measure(const CantorSet& set);

/// ν(B_δ*(t, r)) for a measure on times sorted ascending: mass within |s - t| <= γ⁻¹(r).
double time_ball_mass(const DiscreteMeasure& nu, double t, double r, const ScaleFunction& f);

/// Level-n γ-dyadic tiles [(j-1)w, jw), w = γ⁻¹(2^-n), stored as runs of consecutive j.
/// A point x lies in tile floor(x/w)+1; a nondegenerate interval meets the tiles whose
/// interior it meets.
struct DyadicCover {
  int level = 0;
  double width = 0.0;
  std::vector<std::pair<std::int64_t, std::int64_t>> runs;  // inclusive [first, last]

  std::uint64_t count() const noexcept;
  std::vector<Interval1> intervals() const;
};

DyadicCover gamma_dyadic_cover(std::span<const double> points, int n, const ScaleFunction& f);
DyadicCover gamma_dyadic_cover(const IntervalUnion& E, int n, const ScaleFunction& f);
DyadicCover gamma_dyadic_cover(const CantorSet& E, int n);

/// log₂ of the level-n tile count for an interval union; stays finite when w underflows.
double gamma_dyadic_log2_count(const IntervalUnion& E, int n, const ScaleFunction& f);

/// Greedy δ-covering number with balls of radius r (points need not be sorted).
/// Stationary models use balls [x, x + 2γ⁻¹(r)]; covariance models use grid-point centers.
std::size_t covering_number_delta(std::span<const double> points, double r, const MetricModel& model);
/// Greedy left-to-right count of pairwise disjoint δ-balls of radius r centered in the set.
std::size_t packing_number_delta(std::span<const double> points, double r, const MetricModel& model);

}  // namespace gpfractal
