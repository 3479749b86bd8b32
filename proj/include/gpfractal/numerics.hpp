#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gpfractal::numerics {

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached per n; safe to call concurrently.
const GaussRule& gauss_legendre(std::size_t n);

/// Integrates f over [a, b] with the n-point rule.
template <class F>
double gauss_integrate(F&& f, double a, double b, std::size_t n) {
  const GaussRule& rule = gauss_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  }
  return half * sum;
}

/// Ordinary least-squares line y = intercept + slope * x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r2 = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Wilson score interval for a binomial proportion.
struct Interval {
  double low = 0.0;
  double high = 0.0;
};

Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

/// `count` points log-spaced from `hi` down to `lo` (both included), decreasing.
std::vector<double> log_spaced_decreasing(double hi, double lo, std::size_t count);

}  // namespace gpfractal::numerics
