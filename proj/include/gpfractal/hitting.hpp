#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gpfractal/dimension.hpp"
#include "gpfractal/energy.hpp"
#include "gpfractal/spatial.hpp"

namespace gpfractal {

/// Smallest admissible tol: 3·γ(step)·√(2 log n)·√d, step being the largest time gap
/// the grid leaves inside E (for a Cantor set, the length of its deepest intervals).
double grid_guard(const ScaleFunction& f, const TimeSet& E, std::span<const double> grid, std::size_t d);

struct HitOptions {
  std::size_t grid_n = 2048;
  CovKind kind = CovKind::StationaryIncrements;
  /// Skip the grid guard (unit tests of the bare estimator only).
  bool skip_guard = false;
};

struct HitProbReport {
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t hits = 0;
  std::size_t n_paths = 0;
  double tol = 0.0;
  double guard = 0.0;
  std::size_t grid_n = 0;
  std::size_t d = 0;
  std::uint64_t seed = 0;
  /// Per path: min over the grid of dist(B(t), F).
  std::vector<double> min_distance;
  /// Filled by the battery runner; NaN when not computed.
  double capacity_term = 0.0;
  double content_term = 0.0;

  /// Hit fraction at another tolerance from the same paths.
  double p_at(double tol) const;
};

/// Fraction of paths with min_{t in E grid} dist(B(t), F) <= tol, with a Wilson 95% interval.
/// DomainError "grid too coarse for tol" below the guard.
HitProbReport hit_probability_mc(const ScaleFunction& f, const TimeSet& E, const SpatialSet& F, std::size_t d, double tol,
                                 std::size_t n_paths, std::uint64_t seed, const HitOptions& opt = {});
/// Several targets against the same simulated paths; one tol per target.
std::vector<HitProbReport> hit_probability_mc(const ScaleFunction& f, const TimeSet& E, std::span<const SpatialSet> targets,
                                              std::size_t d, std::span<const double> tols, std::size_t n_paths,
                                              std::uint64_t seed, const HitOptions& opt = {});

struct SmallBallReport {
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t hits = 0;
  std::size_t n_paths = 0;
  double r = 0.0;
  /// Times of the δ-ball B(t0, r) ∩ [a, b] on which B was sampled.
  double window_lo = 0.0;
  double window_hi = 0.0;
  std::size_t window_n = 0;
  /// r^d and (r + f_γ(r))^d (NaN where f_γ is undefined).
  double r_pow_d = 0.0;
  double f_term = 0.0;
};

/// P{inf over s in B_δ(t0, r) ∩ [a, b] of ‖B(s) - z‖ <= r}, with B_δ(t0, r) = {|s - t0| <= γ⁻¹(r)}
/// sampled on window_n equally spaced times (always including t0).
SmallBallReport small_ball_mc(const ScaleFunction& f, double a, double b, double t0, double r, std::span<const double> z,
                              std::size_t n_paths, std::uint64_t seed, std::size_t window_n = 64,
                              CovKind kind = CovKind::StationaryIncrements);

struct SmallBallSweep {
  std::vector<SmallBallReport> points;
  /// Slope of log p against log r.
  double slope = 0.0;
  double slope_stderr = 0.0;
};

SmallBallSweep small_ball_sweep(const ScaleFunction& f, double a, double b, double t0, std::span<const double> radii,
                                std::span<const double> z, std::size_t n_paths, std::uint64_t seed,
                                std::size_t window_n = 64, CovKind kind = CovKind::StationaryIncrements);

/// Greedy cover of the finite set {(t_i, x_j)} by ρ_δ-balls centered at its points, radii from
/// menu (any order). Each step takes the radius with the least (2r)^s per newly covered point.
/// The result is the least total Σ(2r)^s over the greedy and single-radius covers of every
/// coarse-to-fine prefix of the menu, so refining the menu never increases it.
double hausdorff_content_estimate(std::span<const double> times, std::span<const double> points, std::size_t d, double s,
                                  const MetricModel& model, std::span<const double> menu);

/// Dyadic menu R·2^-k, k = 0..levels-1.
std::vector<double> dyadic_menu(double R, int levels);

struct BatteryInstance {
  std::string label;
  TimeSet E;
  SpatialSet F;
  double tol = 0.0;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  /// dim_ρ(E×F) estimate, used to flag critical instances; NaN means estimate it.
  double dim_rho = std::numeric_limits<double>::quiet_NaN();
};

struct SandwichRow {
  std::string label;
  HitProbReport hit;
  double dim_rho = 0.0;
  bool critical = false;
  bool lower_ok = true;
  bool upper_ok = true;
};

struct SandwichReport {
  std::vector<SandwichRow> rows;
  double C1 = 0.0;
  double C2 = 0.0;
  bool pass = false;
};

/// Fits Ĉ₁ = min p_hat/capacity over non-critical instances with positive capacity and
/// Ĉ₂ = max p_hat/content, then checks Ĉ₁·capacity <= ci_high and p_hat <= Ĉ₂·content jointly.
/// Instances with |dim_rho - d| <= 0.15 are critical and excluded. At least 6 rows.
SandwichReport sandwich_report(std::vector<SandwichRow> rows, std::size_t d);

struct BatteryOptions {
  HitOptions hit;
  /// Finest ρ resolution h of the capacity term; the sweep is 2h, √2·h, h.
  double capacity_h = 0.02;
  /// Candidate times and spatial lattice (spacing, point cap) of the capacity term.
  std::size_t term_times = 1024;
  double term_space_h = 0.02;
  std::size_t max_space_points = 1500;
  /// Coarser product set for the greedy content cover.
  std::size_t content_times = 32;
  std::size_t content_space_points = 64;
  int menu_levels = 6;
};

/// Runs every instance (hitting MC, capacity term, content term) at fixed (γ, d).
SandwichReport run_battery(const ScaleFunction& f, std::size_t d, std::span<const BatteryInstance> battery,
                           const BatteryOptions& opt = {});

}  // namespace gpfractal
