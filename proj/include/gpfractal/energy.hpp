#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "gpfractal/fractal_sets.hpp"
#include "gpfractal/metrics.hpp"
#include "gpfractal/spatial.hpp"

namespace gpfractal {

/// Truncated kernel K_ij = φ_β(max(ρ(u_i, u_j), h)) on atoms u_i (row-major, `dim` coordinates,
/// time first). dim == 1 uses δ; dim > 1 uses ρ_δ.
class KernelMatrix {
 public:
  static constexpr std::size_t kMaxAtoms = 4096;

  KernelMatrix(std::vector<double> atoms, std::size_t dim, const MetricModel& model, double beta, double h);
  /// Kernel with precomputed symmetric row-major values.
  KernelMatrix(std::vector<double> atoms, std::size_t dim, double beta, double h, std::vector<double> values);

  std::size_t size() const noexcept { return n_; }
  std::size_t dim() const noexcept { return dim_; }
  double beta() const noexcept { return beta_; }
  double h() const noexcept { return h_; }
  const std::vector<double>& atoms() const noexcept { return atoms_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return k_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const noexcept { return {k_.data() + i * n_, n_}; }

 private:
  std::vector<double> atoms_;
  std::size_t dim_;
  std::size_t n_;
  double beta_;
  double h_;
  std::vector<double> k_;
};

/// wᵀKw; the measure's atoms must coincide with the kernel's.
double energy_discrete(const DiscreteMeasure& measure, const KernelMatrix& kernel);

struct FwTraceRow {
  int iteration = 0;
  double energy = 0.0;
  double gap = 0.0;
  bool away = false;
};

struct EnergyMinimum {
  DiscreteMeasure measure;
  double energy = 0.0;
  /// Frank–Wolfe duality gap at the returned measure.
  double gap = 0.0;
  int iterations = 0;
  std::vector<FwTraceRow> trace;
};

/// Frank–Wolfe with away steps and exact line search, from the uniform measure, until
/// gap <= tol·energy or max_iter iterations.
EnergyMinimum minimize_energy(const KernelMatrix& kernel, double tol = 1e-6, int max_iter = 20000, bool record_trace = false);

enum class CapacityVerdict { Positive, Zero, Inconclusive };
std::string_view verdict_name(CapacityVerdict v);

struct CapacityOptions {
  double tol = 1e-5;
  int max_iter = 20000;
  std::size_t max_candidates = 10000;
  bool record_trace = false;
};

struct CapacityReport {
  double beta = 0.0;
  std::vector<double> resolutions;
  std::vector<std::size_t> atoms;
  std::vector<double> e_min;
  std::vector<double> gaps;
  std::vector<int> iterations;
  std::vector<double> capacity;
  /// Slope of log₂ capacity per octave of refinement over the three finest resolutions.
  double decay_slope = 0.0;
  /// Convergence order of e_min per octave from the three finest resolutions (NaN if undefined).
  double convergence_order = 0.0;
  CapacityVerdict verdict = CapacityVerdict::Inconclusive;
  /// Extrapolated capacity: the Richardson limit if positive, 0 if zero, NaN otherwise.
  double extrapolated = 0.0;
  std::vector<std::vector<FwTraceRow>> traces;
};

/// Greedy farthest-point order of the candidates under ρ; radii[k] is the covering radius
/// of the first k+1 selected atoms. Stops once the radius drops to `stop_radius`.
struct FarthestPointOrder {
  std::vector<std::size_t> order;
  std::vector<double> radii;
};
FarthestPointOrder farthest_point_order(std::span<const double> candidates, std::size_t dim, const MetricModel& model,
                                        double stop_radius);

/// For each resolution h (strictly decreasing, at least 3), subsamples the candidates to
/// spacing ~h, minimizes the energy, and classifies the capacity trend.
CapacityReport capacity_estimate(std::span<const double> candidates, std::size_t dim, const MetricModel& model, double beta,
                                 std::span<const double> resolutions, const CapacityOptions& opt = {});

/// Fills decay_slope, convergence_order, verdict and extrapolated from e_min over the three
/// finest resolutions.
void classify_capacity(CapacityReport& rep);

/// Capacity of E×F under ρ_δ restricted to product measures ν⊗μ_F, μ_F the uniform measure on
/// the F lattice points: a lower bound on the full capacity that needs atoms in time only.
/// K_ij = mean over point pairs (x, y) of φ_β(max(δ(t_i, t_j), ‖x - y‖, h)).
CapacityReport product_capacity_estimate(std::span<const double> times, std::span<const double> points, std::size_t d,
                                         const MetricModel& model, double beta, std::span<const double> resolutions,
                                         const CapacityOptions& opt = {});

/// Candidate atoms (t, x) for E×F: every time crossed with the lattice points of F at spacing h_space.
std::vector<double> product_candidates(std::span<const double> times, const SpatialSet& F, double h_space);

struct FrostmanReport {
  double exponent = 0.0;
  double std_error = 0.0;
  std::vector<double> radii;
  /// log₂ sup_t ν(B(t, r)) per radius.
  std::vector<double> log2_sup_mass;
  /// Band of ν(B(t, r)) / r^exponent over atoms t and radii r.
  double c1 = 0.0;
  double c2 = 0.0;
};

/// Slope of log sup_t ν(B(t, r)) against log r over dyadic r between the atom resolution
/// and the diameter. A measure with a single distinct atom has exponent 0.
FrostmanReport frostman_exponent(const DiscreteMeasure& measure, const MetricModel& model);

}  // namespace gpfractal
