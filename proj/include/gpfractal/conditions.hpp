#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "gpfractal/scale.hpp"

namespace gpfractal {

/// I(x)/γ(x) with I(x) = ∫_{log 2}^∞ γ(x e^{-z}) z^{-1/2} dz, for x = e^{-L}.
/// Relative accuracy tol; NumericalError if the tail does not decay.
double integral_ratio(const ScaleFunction& f, double L, double tol = 1e-9);

/// I(x) itself; x in (0, x_max/2].
double integral_I(const ScaleFunction& f, double x, double tol = 1e-9);

/// f_γ(r) = r√log2 + I(γ⁻¹(r√l)).
double f_gamma(const ScaleFunction& f, double r, double l = 1.0, double tol = 1e-9);

enum class Condition { Strong, Weak, PsiSqrtLog };
enum class Verdict { Satisfied, Violated, Inconclusive };
std::string_view condition_name(Condition c);
std::string_view verdict_name(Verdict v);

/// Trend classification of a ratio sequence on an increasing grid of L = log(1/x).
/// "Decades" are decades of L. Satisfied: the ratio grows by at most 1.5× over the last two
/// decades. Violated: it grows monotonically, by at least 2× per decade, over the last two decades.
struct ConditionVerdict {
  Condition condition = Condition::Strong;
  double eps = 0.0;
  std::vector<double> L_grid;
  std::vector<double> log_ratios;
  Verdict verdict = Verdict::Inconclusive;
  /// Largest ratio over the grid.
  double fitted_constant = 0.0;
  /// No known answer for this family and parameter; the verdict is informational.
  bool open_case = false;

  std::vector<double> ratios() const;
};

/// Default grid: 25 log-spaced L from 1e2 to 1e6.
std::vector<double> default_L_grid();

/// Ratios I(x)/γ(x).
ConditionVerdict check_strong_condition(const ScaleFunction& f, std::span<const double> L_grid = {});
/// Ratios I(x)/γ(x)^{1-eps}.
ConditionVerdict check_weak_condition(const ScaleFunction& f, double eps, std::span<const double> L_grid = {});
/// Ψ_γ(x)·√log(1/x); Satisfied when it decreases over the last two decades and ends below 0.05.
ConditionVerdict psi_sqrtlog_criterion(const ScaleFunction& f, std::span<const double> L_grid = {});

}  // namespace gpfractal
