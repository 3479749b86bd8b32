#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gpfractal/scale.hpp"

namespace gpfractal {

/// Covariance of B₀ on an increasing time grid, with a jittered Cholesky factor.
class CovMatrix {
 public:
  static constexpr std::size_t kMaxSize = 8192;

  CovMatrix(std::vector<double> grid, Eigen::MatrixXd R);

  const std::vector<double>& grid() const noexcept { return grid_; }
  const Eigen::MatrixXd& matrix() const noexcept { return R_; }
  std::size_t size() const noexcept { return grid_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return R_(i, j); }

  /// Index of grid point t (relative tolerance 1e-12); DomainError when off-grid.
  std::size_t index_of(double t) const;

  /// Cholesky with jitter 1e-14·mean(diag)·10^k, k = 0..5. NumericalError if all fail.
  void factorize();
  bool factorized() const noexcept { return L_.size() > 0; }
  const Eigen::MatrixXd& cholesky() const;
  double jitter_used() const noexcept { return jitter_; }
  /// max |L Lᵀ - R| / max |R|.
  double cholesky_residual() const;

 private:
  std::vector<double> grid_;
  Eigen::MatrixXd R_;
  Eigen::MatrixXd L_;
  double jitter_ = 0.0;
};

/// R(s,t) = (γ²(s) + γ²(t) - γ²(|t-s|)) / 2. Factorized on return.
CovMatrix cov_stationary_increments(const ScaleFunction& f, std::span<const double> grid);

/// R(s,t) = ∫₀^{s∧t} √((γ²)'(t-u)) √((γ²)'(s-u)) du, factorized on return.
/// n_quad (>= 64) sets the Gauss–Legendre budget per geometric panel; the result is checked
/// against a doubled budget and NumericalError is raised above 1e-6 relative change.
CovMatrix cov_volterra(const ScaleFunction& f, std::span<const double> grid, std::size_t n_quad = 64);

/// Var(B₀(t) | B₀(s)) = R(t,t) - R(s,t)² / R(s,s).
double conditional_variance(const CovMatrix& cov, double s, double t);

/// Uniform grid of n points on [a, b] (both included).
std::vector<double> uniform_grid(double a, double b, std::size_t n);

/// Samples of B = (B₁..B_d) on the grid. values[(p*n + i)*d + c].
struct PathBatch {
  std::vector<double> grid;
  std::size_t d = 0;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  std::vector<double> values;

  double at(std::size_t path, std::size_t i, std::size_t c) const { return values[(path * grid.size() + i) * d + c]; }
};

/// Draws paths in fixed blocks of kBlockPaths. Path p, component c always uses the normal
/// stream substream(seed, p, c) and the same block arithmetic, so output does not depend on
/// how blocks are scheduled.
class PathSampler {
 public:
  static constexpr std::size_t kBlockPaths = 16;

  PathSampler(const CovMatrix& cov, std::size_t d, std::uint64_t seed);

  std::size_t n() const noexcept { return cov_.size(); }
  std::size_t d() const noexcept { return d_; }

  /// Paths [block*kBlockPaths, ...) clipped to n_paths; out gets (p_local*n + i)*d + c layout.
  /// Returns the number of paths written.
  std::size_t sample_block(std::size_t block, std::size_t n_paths, std::vector<double>& out) const;

  /// Calls fn(first_path, count, values) for every block, in parallel when OpenMP is on.
  /// fn must be safe to call concurrently for different blocks.
  void for_each_block(std::size_t n_paths,
                      const std::function<void(std::size_t, std::size_t, std::span<const double>)>& fn) const;

 private:
  const CovMatrix& cov_;
  std::size_t d_;
  std::uint64_t seed_;
};

PathBatch sample_paths(const CovMatrix& cov, std::size_t d, std::size_t n_paths, std::uint64_t seed);

/// Binary: "GPFPATHS", uint64 n, d, n_paths, seed, then grid and values as little-endian float64.
void write_paths_binary(const PathBatch& batch, std::ostream& out);
PathBatch read_paths_binary(std::istream& in);
/// CSV long format with header path,component,t,value (0-based path and component).
void write_paths_csv(const PathBatch& batch, std::ostream& out);

}  // namespace gpfractal
