#pragma once

#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "gpfractal/gp_sim.hpp"
#include "gpfractal/scale.hpp"

namespace gpfractal {

/// Canonical metric δ of B₀: analytic δ*(s,t) = γ(|t-s|), or read off a covariance matrix.
class MetricModel {
 public:
  static MetricModel stationary(ScaleFunction f);
  static MetricModel from_covariance(std::shared_ptr<const CovMatrix> cov);

  bool is_stationary() const noexcept { return std::holds_alternative<ScaleFunction>(backend_); }
  /// nullptr unless stationary.
  const ScaleFunction* scale() const noexcept { return std::get_if<ScaleFunction>(&backend_); }
  /// nullptr unless covariance-backed.
  const CovMatrix* covariance() const noexcept;

  double delta(double s, double t) const;
  /// δ between grid indices; covariance-backed models only.
  double delta_index(std::size_t i, std::size_t j) const;
  /// ρ_δ((s,x),(t,y)) = max(δ(s,t), ‖x - y‖).
  double rho(double s, std::span<const double> x, double t, std::span<const double> y) const;

 private:
  explicit MetricModel(std::variant<ScaleFunction, std::shared_ptr<const CovMatrix>> b) : backend_(std::move(b)) {}
  std::variant<ScaleFunction, std::shared_ptr<const CovMatrix>> backend_;
};

double euclidean_distance(std::span<const double> x, std::span<const double> y);

struct CommensurabilityReport {
  double l_hat = 1.0;
  double ratio_min = 1.0;
  double ratio_max = 1.0;
  std::size_t n_pairs = 0;
  // Pairs (s,t) attaining the extremes.
  double argmin_s = 0.0, argmin_t = 0.0, argmax_s = 0.0, argmax_t = 0.0;
};

/// Ratios δ(s,t) / γ(|t-s|) over all distinct grid pairs; l_hat = max(ratio_max, 1/ratio_min)².
CommensurabilityReport commensurability_report(const CovMatrix& cov, const ScaleFunction& f);

}  // namespace gpfractal
