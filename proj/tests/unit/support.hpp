#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "gpfractal/scale.hpp"

namespace testsupport {

// Minimal hand-rolled generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  double normal() { return std::normal_distribution<double>()(eng_); }
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

inline std::vector<gpfractal::ScaleFunction> registry() {
  using gpfractal::ScaleFunction;
  return {
      ScaleFunction::power(0.5),           ScaleFunction::power(0.3),
      ScaleFunction::power(0.75),          ScaleFunction::power_log(0.3, 1.0),
      ScaleFunction::power_log(0.3, -1.0), ScaleFunction::log_scale(1.0),
      ScaleFunction::exp_log(0.3),         ScaleFunction::exp_log(0.7),
      ScaleFunction::log_corrected(1.0, 0.5), ScaleFunction::power_exp_log(0.4, 0.5),
      ScaleFunction::power_log_log(0.4),
  };
}

// Minimum of wᵀKw over the simplex grid {w : w_i = k_i / m, Σ k_i = m}, K row-major n×n.
inline double brute_simplex_min(const std::vector<double>& K, std::size_t n, int m) {
  // partial[k][i] = Σ_{j<k} w_j K_ij, so the energy accumulates one coordinate at a time.
  std::vector<std::vector<double>> partial(n + 1, std::vector<double>(n, 0.0));
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, int, double)> rec = [&](std::size_t k, int left, double e) {
    if (k + 1 == n) {
      const double w = static_cast<double>(left) / m;
      best = std::min(best, e + 2.0 * w * partial[k][k] + w * w * K[k * n + k]);
      return;
    }
    for (int c = 0; c <= left; ++c) {
      const double w = static_cast<double>(c) / m;
      for (std::size_t i = k + 1; i < n; ++i) partial[k + 1][i] = partial[k][i] + w * K[i * n + k];
      rec(k + 1, left - c, e + 2.0 * w * partial[k][k] + w * w * K[k * n + k]);
    }
  };
  rec(0, m, 0.0);
  return best;
}

}  // namespace testsupport
