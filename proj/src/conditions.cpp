#include "gpfractal/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gpfractal/errors.hpp"
#include "gpfractal/format.hpp"
#include "gpfractal/numerics.hpp"

namespace gpfractal {

namespace {

// Adaptive Gauss–Legendre on [a, b]: 10 vs 20 points, bisecting until they agree.
template <class F>
double adaptive(F&& g, double a, double b, double abs_tol, int depth) {
  const double coarse = numerics::gauss_integrate(g, a, b, 10);
  const double fine = numerics::gauss_integrate(g, a, b, 20);
  if (std::abs(fine - coarse) <= abs_tol || depth == 0) return fine;
  const double m = 0.5 * (a + b);
  return adaptive(g, a, m, 0.5 * abs_tol, depth - 1) + adaptive(g, m, b, 0.5 * abs_tol, depth - 1);
}

void check_grid(std::span<const double> L, const ScaleFunction& f) {
  if (L.size() < 3) throw DomainError("condition grid needs at least 3 points");
  for (std::size_t i = 0; i < L.size(); ++i) {
    if (i > 0 && !(L[i] > L[i - 1])) throw DomainError("condition grid must be increasing in log(1/x)");
  }
  if (L.front() < f.L_min() + std::numbers::ln2) throw DomainError("condition grid reaches beyond x_max/2");
}

void classify(ConditionVerdict& v) {
  const auto& L = v.L_grid;
  const auto& y = v.log_ratios;
  v.fitted_constant = std::exp(*std::max_element(y.begin(), y.end()));
  // Window: the last two decades of L.
  const double L_start = L.back() / 100.0;
  std::size_t first = 0;
  while (first + 1 < L.size() && L[first] < L_start * (1.0 - 1e-12)) ++first;
  if (L.size() - first < 3) first = L.size() - 3;
  double peak = -std::numeric_limits<double>::infinity();
  bool monotone = true;
  for (std::size_t i = first; i < L.size(); ++i) {
    peak = std::max(peak, y[i]);
    if (i > first && !(y[i] > y[i - 1])) monotone = false;
  }
  const double decades = std::log10(L.back() / L[first]);
  const double per_decade = (y.back() - y[first]) / decades / std::numbers::ln10;
  if (peak - y[first] <= std::log(1.5)) {
    v.verdict = Verdict::Satisfied;
  } else if (monotone && per_decade >= std::log10(2.0)) {
    v.verdict = Verdict::Violated;
  } else {
    v.verdict = Verdict::Inconclusive;
  }
}

bool open_case(const ScaleFunction& f) {
  return f.family() == Family::ExpLog && f.params()[0] >= 0.5 && f.params()[0] < 1.0;
}

std::vector<double> grid_or_default(std::span<const double> L) {
  if (L.empty()) return default_L_grid();
  return {L.begin(), L.end()};
}

}  // namespace

double integral_ratio(const ScaleFunction& f, double L, double tol) {
  if (!(tol > 0.0)) throw DomainError("integral_I: tol must be positive");
  if (L < f.L_min() + std::numbers::ln2 * (1.0 - 1e-12)) throw DomainError("integral_I: x must lie in (0, x_max/2]");
  // z = e^w, dz/√z = e^{w/2} dw.
  auto g = [&](double w) { return std::exp(f.log_increment(L, std::exp(w)) + 0.5 * w); };
  const double w0 = std::log(std::numbers::ln2);
  double sum = 0.0, prev = 0.0;
  int shrinking = 0;
  for (int k = 0;; ++k) {
    const double a = w0 + k, b = a + 1.0;
    if (b > 700.0) throw NumericalError("integral_I: tail does not decay (non-convergent integral)");
    const double c = adaptive(g, a, b, 1e-3 * tol * std::max(sum, 1e-300), 12);
    sum += c;
    if (c == 0.0 && k > 0) break;
    shrinking = (k > 0 && c < prev) ? shrinking + 1 : 0;
    if (shrinking >= 3) {
      const double q = c / prev;
      if (q < 0.95) {
        const double tail = c * q / (1.0 - q);
        if (tail <= 0.01 * tol * sum) {
          sum += tail;
          break;
        }
      }
    }
    prev = c;
  }
  return sum;
}

double integral_I(const ScaleFunction& f, double x, double tol) {
  if (!(x > 0.0) || x > 0.5 * f.x_max() * (1.0 + 1e-12)) throw DomainError("integral_I: x must lie in (0, x_max/2]");
  return f.eval(x) * integral_ratio(f, -std::log(x), tol);
}

double f_gamma(const ScaleFunction& f, double r, double l, double tol) {
  if (!(r > 0.0)) throw DomainError("f_gamma: r must be positive");
  if (!(l >= 1.0)) throw DomainError("f_gamma: l must be >= 1");
  const double v = r * std::sqrt(l);
  const double Lx = f.log_inverse(std::log(v));
  if (Lx < f.L_min() + std::numbers::ln2) throw DomainError("f_gamma: r·√l = " + format_double(v) + " is too large");
  return r * std::sqrt(std::numbers::ln2) + v * integral_ratio(f, Lx, tol);
}

std::string_view condition_name(Condition c) {
  switch (c) {
    case Condition::Strong:
      return "strong";
    case Condition::Weak:
      return "weak";
    case Condition::PsiSqrtLog:
      break;
  }
  return "psi_sqrtlog";
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Satisfied:
      return "satisfied";
    case Verdict::Violated:
      return "violated";
    case Verdict::Inconclusive:
      break;
  }
  return "inconclusive";
}

std::vector<double> ConditionVerdict::ratios() const {
  std::vector<double> out;
  for (double y : log_ratios) out.push_back(std::exp(y));
  return out;
}

std::vector<double> default_L_grid() {
  auto g = numerics::log_spaced_decreasing(1e6, 1e2, 25);
  std::reverse(g.begin(), g.end());
  return g;
}

ConditionVerdict check_strong_condition(const ScaleFunction& f, std::span<const double> L_grid) {
  return check_weak_condition(f, 0.0, L_grid);
}

ConditionVerdict check_weak_condition(const ScaleFunction& f, double eps, std::span<const double> L_grid) {
  if (!(eps >= 0.0 && eps < 1.0)) throw DomainError("weak condition: eps must lie in [0, 1)");
  ConditionVerdict v;
  v.condition = eps == 0.0 ? Condition::Strong : Condition::Weak;
  v.eps = eps;
  v.L_grid = grid_or_default(L_grid);
  check_grid(v.L_grid, f);
  v.open_case = open_case(f);
  for (double L : v.L_grid) v.log_ratios.push_back(std::log(integral_ratio(f, L)) + eps * f.log_value_at(L));
  classify(v);
  return v;
}

ConditionVerdict psi_sqrtlog_criterion(const ScaleFunction& f, std::span<const double> L_grid) {
  ConditionVerdict v;
  v.condition = Condition::PsiSqrtLog;
  v.L_grid = grid_or_default(L_grid);
  check_grid(v.L_grid, f);
  bool decreasing = true;
  const double L_start = v.L_grid.back() / 100.0;
  double prev = std::numeric_limits<double>::infinity();
  for (double L : v.L_grid) {
    const double p = f.psi_at(L) * std::sqrt(L);
    v.log_ratios.push_back(std::log(p));
    if (L >= L_start * (1.0 - 1e-12)) {
      if (!(p < prev)) decreasing = false;
      prev = p;
    }
  }
  v.fitted_constant = std::exp(*std::max_element(v.log_ratios.begin(), v.log_ratios.end()));
  v.verdict = decreasing && std::exp(v.log_ratios.back()) < 0.05 ? Verdict::Satisfied : Verdict::Violated;
  return v;
}

}  // namespace gpfractal
