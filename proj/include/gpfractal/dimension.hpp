#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "gpfractal/fractal_sets.hpp"
#include "gpfractal/gp_sim.hpp"
#include "gpfractal/scale.hpp"
#include "gpfractal/spatial.hpp"

namespace gpfractal {

enum class DimMethod { BoxEuclidean, GammaDyadic, ProductRho };

struct ScaleCount {
  double scale = 0.0;
  double log2_count = 0.0;
};

/// Slope-fit dimension estimate. counts runs from coarse to fine; the fit uses
/// counts[fit_first..fit_last].
struct DimensionEstimate {
  DimMethod method = DimMethod::BoxEuclidean;
  double value = 0.0;
  double std_error = 0.0;
  double scale_min = 0.0;
  double scale_max = 0.0;
  std::size_t fit_first = 0;
  std::size_t fit_last = 0;
  std::vector<ScaleCount> counts;
  /// Counts grow faster than any geometric rate (dimension +∞).
  bool divergent = false;
};

struct BoxCountOptions {
  /// Explicit box sides (any order); empty means halving from the extent until half the
  /// points sit in their own box.
  std::vector<double> scales;
  std::size_t min_points = 1000;
  int drop_coarse = 2;
  int drop_fine = 2;
};

/// Box-counting dimension of n points in R^dim (row-major).
DimensionEstimate box_dimension_euclidean(std::span<const double> points, std::size_t dim, const BoxCountOptions& opt = {});

/// Slope of log₂ N(n) against n for γ-dyadic tile counts. Empty `levels` picks a default range.
DimensionEstimate dim_delta_estimate(const IntervalUnion& E, const ScaleFunction& f, std::span<const int> levels = {});
DimensionEstimate dim_delta_estimate(const CantorSet& E, std::span<const int> levels = {});

using TimeSet = std::variant<IntervalUnion, CantorSet>;

/// ρ_δ product counts N_δ(E, n) · N_box(F, 2^-n).
DimensionEstimate dim_rho_product(const TimeSet& E, const SpatialSet& F, const ScaleFunction& f, std::span<const int> levels = {});

DimensionEstimate dim_delta_estimate(const TimeSet& E, const ScaleFunction& f, std::span<const int> levels = {});

/// Simulation times for E: a uniform grid spread over the parts of an interval union
/// (proportional to length), or the atoms of a Cantor set.
std::vector<double> time_grid(const TimeSet& E, std::size_t grid_n);

enum class CovKind { StationaryIncrements, Volterra };

CovMatrix build_covariance(const ScaleFunction& f, std::span<const double> grid, CovKind kind);

struct ImageDimensionReport {
  std::size_t d = 0;
  std::size_t n_paths = 0;
  std::size_t grid_n = 0;
  std::uint64_t seed = 0;
  std::vector<double> per_path;
  double mean = 0.0;
  double sd = 0.0;
  double min = 0.0;
  double max = 0.0;
  DimensionEstimate dim_delta;
  /// min(d, dim_δ(E)).
  double predicted = 0.0;
};

ImageDimensionReport image_dimension_experiment(const ScaleFunction& f, const TimeSet& E, std::size_t d,
                                                std::size_t n_paths, std::size_t grid_n, std::uint64_t seed,
                                                CovKind kind = CovKind::StationaryIncrements);

struct IntersectionReport {
  std::size_t d = 0;
  std::size_t n_paths = 0;
  std::size_t grid_n = 0;
  double tol = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::uint8_t> hit;
  std::vector<std::size_t> hit_points;
  /// Per path; NaN where too few points landed near F.
  std::vector<double> dim_preimage;
  std::vector<double> dim_image;
  double hit_rate = 0.0;
  bool defined = false;
  double max_dim_preimage = 0.0;
  double max_dim_image = 0.0;
  double index_H = 0.0;
  double dim_E = 0.0;
  double dim_F = 0.0;
  double dim_rho = 0.0;
  /// dim_Euc(E) + H(dim_Euc(F) - d) and H(dim_ρ(E×F) - d).
  double lower_bound = 0.0;
  double upper_bound = 0.0;
};

IntersectionReport intersection_dimension_experiment(const ScaleFunction& f, const TimeSet& E, const SpatialSet& F,
                                                     std::size_t d, std::size_t n_paths, double tol, std::uint64_t seed,
                                                     std::size_t grid_n, std::size_t min_points = 64,
                                                     CovKind kind = CovKind::StationaryIncrements);

/// Regular-variation index H of γ, read off Ψ over [1e-12, 1e-2] ∩ (0, x_max].
double regular_variation_index(const ScaleFunction& f);

}  // namespace gpfractal
