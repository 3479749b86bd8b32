#include <cmath>

#include "doctest.h"
#include "gpfractal/energy.hpp"
#include "gpfractal/errors.hpp"
#include "gpfractal/gp_sim.hpp"
#include "support.hpp"

using namespace gpfractal;
using doctest::Approx;

namespace {

std::vector<double> dense(const KernelMatrix& K) {
  std::vector<double> out;
  for (std::size_t i = 0; i < K.size(); ++i)
    for (std::size_t j = 0; j < K.size(); ++j) out.push_back(K(i, j));
  return out;
}

// Random times in [0.2, 1] with a kernel truncated below the smallest separation.
KernelMatrix random_kernel(testsupport::Gen& g, std::size_t n, const MetricModel& model, double beta) {
  std::vector<double> t;
  for (std::size_t i = 0; i < n; ++i) t.push_back(g.uniform(0.2, 1.0));
  std::sort(t.begin(), t.end());
  double sep = 1.0;
  for (std::size_t i = 1; i < n; ++i) sep = std::min(sep, model.delta(t[i - 1], t[i]));
  return KernelMatrix(t, 1, model, beta, 0.5 * sep);
}

}  // namespace

TEST_CASE("energy examples") {
  const auto model = MetricModel::stationary(ScaleFunction::power(0.5));
  const KernelMatrix K({0.3, 0.55}, 1, model, 1.0, 0.01);
  CHECK(K(0, 0) == Approx(100.0));
  CHECK(K(0, 1) == Approx(1.0 / 0.5));
  CHECK(energy_discrete(point_mass(std::vector<double>{0.3}), KernelMatrix({0.3}, 1, model, 1.0, 0.01)) == Approx(100.0));

  DiscreteMeasure two{1, {0.3, 0.55}, {0.5, 0.5}};
  CHECK(energy_discrete(two, K) == Approx((100.0 + 2.0) / 2.0));

  const auto grid = uniform_grid(0.2, 1.0, 50);
  const KernelMatrix Kneg(grid, 1, model, -1.0, 0.01);
  CHECK(energy_discrete(uniform_measure(grid), Kneg) == Approx(1.0));

  DiscreteMeasure other{1, {0.3, 0.6}, {0.5, 0.5}};
  CHECK_THROWS_AS(energy_discrete(other, K), DomainError);
  CHECK_THROWS_AS(KernelMatrix({0.3}, 1, model, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(KernelMatrix(uniform_grid(0.2, 1.0, KernelMatrix::kMaxAtoms + 1), 1, model, 1.0, 0.01), DomainError);
}

TEST_CASE("minimize_energy examples") {
  const auto model = MetricModel::stationary(ScaleFunction::power(0.5));
  const KernelMatrix K({0.3, 0.55}, 1, model, 1.0, 0.01);
  const auto m = minimize_energy(K, 1e-10, 1000);
  CHECK(m.measure.weights[0] == Approx(0.5));
  CHECK(m.measure.weights[1] == Approx(0.5));

  const KernelMatrix K1({0.4}, 1, model, 1.5, 0.02);
  const auto one = minimize_energy(K1);
  CHECK(one.measure.weights == std::vector<double>{1.0});
  CHECK(one.energy == Approx(phi_kernel(1.5, 0.02)));

  testsupport::Gen g(11);
  for (int rep = 0; rep < 5; ++rep) {
    const auto Kr = random_kernel(g, 3, model, g.uniform(0.3, 1.5));
    const double brute = testsupport::brute_simplex_min(dense(Kr), 3, 200);
    const auto fw = minimize_energy(Kr, 1e-9, 100000);
    CHECK(std::abs(fw.energy - brute) <= 1e-3 * std::max(1.0, brute));
  }
}

TEST_CASE("property: Frank-Wolfe gap certifies against the brute-force simplex minimum") {
  testsupport::Gen g(2024);
  for (int rep = 0; rep < 20; ++rep) {
    const auto model = MetricModel::stationary(ScaleFunction::power(g.uniform(0.3, 0.8)));
    const auto K = random_kernel(g, 5, model, g.uniform(0.2, 1.2));
    const double brute = testsupport::brute_simplex_min(dense(K), 5, 40);
    const auto fw = minimize_energy(K, 1e-3, 100000);
    CAPTURE(rep);
    CHECK(fw.energy - brute <= fw.gap + 1e-9);
    CHECK(fw.gap <= 1e-3 * fw.energy);
    fw.measure.validate();
  }
}

TEST_CASE("property: resolution monotonicity and uniform upper bound") {
  testsupport::Gen g(5);
  for (int rep = 0; rep < 10; ++rep) {
    const auto model = MetricModel::stationary(ScaleFunction::power(g.uniform(0.3, 0.8)));
    std::vector<double> t;
    const int n = g.integer(5, 60);
    for (int i = 0; i < n; ++i) t.push_back(g.uniform(0.2, 1.0));
    std::sort(t.begin(), t.end());
    const double beta = g.uniform(0.5, 3.0);
    const double h1 = g.uniform(0.05, 0.2), h2 = h1 * g.uniform(0.1, 0.9);
    const KernelMatrix coarse(t, 1, model, beta, h1), fine(t, 1, model, beta, h2);
    const auto a = minimize_energy(coarse, 1e-8, 200000), b = minimize_energy(fine, 1e-8, 200000);
    CHECK(a.energy <= b.energy * (1 + 1e-6));
    CHECK(a.energy <= energy_discrete(uniform_measure(t), coarse) * (1 + 1e-12));
    CHECK(b.energy <= energy_discrete(uniform_measure(t), fine) * (1 + 1e-12));
  }
}

TEST_CASE("property: energy stays bounded as h shrinks below the Frostman exponent") {
  const auto f = ScaleFunction::power(0.5);
  const auto model = MetricModel::stationary(f);
  const auto nu = cantor_measure(build_cantor(f, 0.8, 10));
  const auto fr = frostman_exponent(nu, model);
  const double beta = fr.exponent - 0.3;
  std::vector<double> e;
  // Sweep h down to the atom resolution δ ≈ 2^(-10/0.8).
  for (int k = 2; k <= 12; k += 2) e.push_back(energy_discrete(nu, KernelMatrix(nu.coords, 1, model, beta, std::exp2(-k))));
  for (std::size_t i = 1; i < e.size(); ++i) CHECK(e[i] >= e[i - 1]);
  for (std::size_t i = 2; i < e.size(); ++i) CHECK(e[i] - e[i - 1] <= e[i - 1] - e[i - 2]);
  CHECK(e.back() <= 1.1 * e[e.size() - 2]);
}

TEST_CASE("capacity verdicts on an interval") {
  const auto model = MetricModel::stationary(ScaleFunction::power(0.5));
  const auto grid = uniform_grid(0.2, 1.0, 4096);
  std::vector<double> res;
  for (int k = 0; k <= 6; ++k) res.push_back(0.25 * std::exp2(-k / 2.0));
  const auto pos = capacity_estimate(grid, 1, model, 1.5, res);
  CHECK(pos.verdict == CapacityVerdict::Positive);
  CHECK(pos.extrapolated > 0.0);
  for (std::size_t i = 1; i < pos.e_min.size(); ++i) {
    CHECK(pos.e_min[i] >= pos.e_min[i - 1]);
    CHECK(pos.atoms[i] >= pos.atoms[i - 1]);
  }
  for (std::size_t i = 0; i < pos.gaps.size(); ++i) CHECK(pos.gaps[i] <= 1e-5 * pos.e_min[i]);
  const auto zero = capacity_estimate(grid, 1, model, 2.5, res);
  CHECK(zero.verdict == CapacityVerdict::Zero);
  CHECK(zero.extrapolated == 0.0);
  CHECK_THROWS_AS(capacity_estimate(grid, 1, model, 1.5, std::vector<double>{0.1, 0.2, 0.05}), DomainError);
  CHECK_THROWS_AS(capacity_estimate(uniform_grid(0.2, 1.0, 20000), 1, model, 1.5, res), DomainError);
}

TEST_CASE("farthest-point subsampling") {
  const auto model = MetricModel::stationary(ScaleFunction::power(0.5));
  const auto grid = uniform_grid(0.2, 1.0, 500);
  const auto fp = farthest_point_order(grid, 1, model, 0.05);
  for (std::size_t i = 1; i < fp.radii.size(); ++i) CHECK(fp.radii[i] <= fp.radii[i - 1]);
  CHECK(fp.radii.back() <= 0.05);
  // Selected atoms are pairwise separated by at least the covering radius before the last pick.
  const double sep = fp.radii[fp.radii.size() - 2];
  for (std::size_t a = 0; a < fp.order.size(); ++a)
    for (std::size_t b = a + 1; b < fp.order.size(); ++b) CHECK(model.delta(grid[fp.order[a]], grid[fp.order[b]]) >= sep * (1 - 1e-12));
}

TEST_CASE("Frostman exponents") {
  const auto f = ScaleFunction::power(0.5);
  const auto model = MetricModel::stationary(f);
  for (double zeta : {0.5, 0.8, 1.0}) {
    const auto fr = frostman_exponent(cantor_measure(build_cantor(f, zeta, 11)), model);
    CHECK(fr.exponent == Approx(zeta).epsilon(0.1 / zeta));
    CHECK(fr.c1 > 0.0);
    CHECK(fr.c2 <= 8.0);
  }
  for (double H : {0.3, 0.5, 0.75}) {
    const auto fr = frostman_exponent(uniform_measure(uniform_grid(0.2, 1.0, 1000)), MetricModel::stationary(ScaleFunction::power(H)));
    CHECK(std::abs(fr.exponent - 1.0 / H) <= 0.1);
  }
  CHECK(frostman_exponent(point_mass(std::vector<double>{0.5}), model).exponent == 0.0);
}
