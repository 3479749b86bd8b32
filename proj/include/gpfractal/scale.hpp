#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gpfractal {

enum class Family { Power, PowerLog, LogScale, ExpLog, LogCorrected, PowerExpLog, PowerLogLog, Custom };

std::string_view family_name(Family f);

/// Variance scale γ on (0, x_max]. Internally everything is expressed in
/// L = log(1/r), where the small-r behaviour of slowly varying families stays representable.
///
///   power:H             r^H
///   powerlog:H,beta     r^H log^beta(1/r)
///   logscale:beta       log^-beta(1/r)
///   explog:alpha        exp(-log^alpha(1/r))
///   logcorrected:beta,alpha   log^-beta(1/r) * log^alpha(log(1/r))
///   powerexplog:H,beta  r^H exp(log^beta(1/r))
///   powerloglog:H       r^H exp(log(1/r) / log log(1/r))
///   custom:path=...     log-log interpolation of (r, gamma) knots
class ScaleFunction {
 public:
  static ScaleFunction power(double H, double x_max = 0.0);
  static ScaleFunction power_log(double H, double beta, double x_max = 0.0);
  static ScaleFunction log_scale(double beta, double x_max = 0.0);
  static ScaleFunction exp_log(double alpha, double x_max = 0.0);
  static ScaleFunction log_corrected(double beta, double alpha, double x_max = 0.0);
  static ScaleFunction power_exp_log(double H, double beta, double x_max = 0.0);
  static ScaleFunction power_log_log(double H, double x_max = 0.0);
  static ScaleFunction custom(std::vector<double> r, std::vector<double> gamma);
  static ScaleFunction custom_from_csv(const std::string& path);

  /// Parses "family:key=value,..." (optional x_max=... for every family).
  static ScaleFunction parse(std::string_view spec);

  /// Canonical spec string; parse(spec()) reproduces the function.
  std::string spec() const;

  Family family() const noexcept { return family_; }
  double x_max() const noexcept { return x_max_; }
  double L_min() const noexcept { return L_min_; }
  std::span<const double> params() const noexcept { return params_; }

  double operator()(double r) const { return eval(r); }
  double eval(double r) const;
  double derivative(double r) const;
  /// (γ²)'(r) = 2 γ(r) γ'(r).
  double variance_derivative(double r) const;
  /// γ⁻¹(v), to |γ(r) - v| <= tol. May underflow to 0 for very small v; use log_inverse then.
  double inverse(double v, double tol = 1e-12) const;
  /// L such that log γ(e^-L) = log_v.
  double log_inverse(double log_v) const;
  /// Ψ_γ(r) = r γ'(r) / γ(r).
  double psi(double r) const;

  /// log γ(e^-L), for L >= L_min().
  double log_value_at(double L) const;
  /// Ψ_γ(e^-L).
  double psi_at(double L) const;
  /// log γ(e^-(L+z)) - log γ(e^-L) for z >= 0, without cancellation.
  double log_increment(double L, double z) const;

  /// Largest x such that γ is concave on (0, x] as seen on a fine log grid; 0 if none.
  double concavity_limit() const noexcept { return x_conc_; }
  bool concave_near_zero() const noexcept { return x_conc_ > 0.0; }
  /// Same for γ². Below this span γ²(|t-s|) is a valid variogram, so the stationary-increment
  /// covariance is positive semidefinite on any grid of span <= this value.
  double variance_concavity_limit() const noexcept { return x_var_conc_; }

 private:
  ScaleFunction(Family family, std::vector<double> params, double x_max);
  void finalize();
  double custom_log_value(double L) const;

  Family family_;
  std::vector<double> params_;
  double x_max_ = 0.0;
  double L_min_ = 0.0;
  double x_conc_ = 0.0;
  double x_var_conc_ = 0.0;
  // Custom knots in log-log coordinates, ascending in log r.
  std::vector<double> knot_log_r_;
  std::vector<double> knot_log_g_;
  std::string source_path_;
};

struct IndexReport {
  std::vector<double> r;
  std::vector<double> psi;
  double liminf_est = 0.0;
  double limsup_est = 0.0;
  double ind_lower = 0.0;
  double ind_upper = 0.0;
  double psi_sqrtlog_limit_est = 0.0;
};

/// r_grid must be decreasing and span at least 4 decades inside (0, x_max].
IndexReport lower_index_report(const ScaleFunction& f, std::span<const double> r_grid);

/// φ_β(r): r^-β (β>0), log(e / min(r,1)) (β=0), 1 (β<0).
double phi_kernel(double beta, double r);

}  // namespace gpfractal
