#include <algorithm>
#include <cmath>
#include <memory>

#include "doctest.h"
#include "gpfractal/errors.hpp"
#include "gpfractal/fractal_sets.hpp"
#include "gpfractal/numerics.hpp"
#include "support.hpp"

using namespace gpfractal;
using doctest::Approx;

TEST_CASE("middle-thirds geometry") {
  const auto set = build_cantor(ScaleFunction::power(1.0), std::log(2.0) / std::log(3.0), 2);
  CHECK(set.t_seq()[1] == Approx(1.0 / 3).epsilon(1e-13));
  CHECK(set.t_seq()[2] == Approx(1.0 / 9).epsilon(1e-13));
  const auto lv = set.level(2);
  const double expect[4][2] = {{0, 1.0 / 9}, {2.0 / 9, 1.0 / 3}, {2.0 / 3, 7.0 / 9}, {8.0 / 9, 1.0}};
  REQUIRE(lv.size() == 4);
  for (int j = 0; j < 4; ++j) {
    CHECK(lv[j].left == Approx(expect[j][0]).epsilon(1e-13));
    CHECK(lv[j].right == Approx(expect[j][1]).epsilon(1e-13));
  }
}

TEST_CASE("cantor examples and errors") {
  const auto single = build_cantor(ScaleFunction::power(0.5), 1.0, 0, 0.5);
  REQUIRE(single.level(0).size() == 1);
  CHECK(single.level(0)[0].left == 0.0);
  CHECK(single.level(0)[0].right == 0.5);

  const auto quarter = build_cantor(ScaleFunction::power(0.5), 1.0, 6, 0.8);
  for (int k = 0; k <= 6; ++k) {
    CHECK(quarter.t_seq()[k] == Approx(std::pow(4.0, -k)).epsilon(1e-13));
    for (const auto& iv : quarter.level(k)) CHECK(iv.length() == Approx(0.8 * std::pow(4.0, -k)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(build_cantor(ScaleFunction::power(0.5), 3.0, 4), NumericalError);
  CHECK_THROWS_AS(build_cantor(ScaleFunction::power(0.5), 1.0, 41), DomainError);
  CHECK_THROWS_AS(build_cantor(ScaleFunction::power(0.5), 1.0, 4, 1.5), DomainError);
  CHECK_THROWS_AS(build_cantor(ScaleFunction::power(0.5), -1.0, 4), DomainError);
}

TEST_CASE("property: nesting, disjointness, and lengths across families") {
  testsupport::Gen gen(31);
  for (const auto& f : testsupport::registry()) {
    for (int trial = 0; trial < 3; ++trial) {
      const double zeta = gen.uniform(0.2, 1.0);
      const double eps0 = gen.uniform(0.3, 1.0) * std::min(1.0, f.x_max());
      CAPTURE(f.spec());
      CAPTURE(zeta);
      CantorSet set = [&] {
        try {
          return build_cantor(f, zeta, 10, eps0);
        } catch (const std::exception&) {
          return build_cantor(f, zeta, 0, eps0);
        }
      }();
      for (int k = 1; k <= set.depth(); ++k) {
        CHECK(set.t_seq()[k] < set.t_seq()[k - 1]);
        CHECK(set.l_seq()[k] <= 0.5 + 1e-12);
        const auto lv = set.level(k);
        const auto parent = set.level(k - 1);
        CHECK(lv.size() == (std::size_t{1} << k));
        for (std::size_t j = 0; j < lv.size(); ++j) {
          CHECK(lv[j].length() == Approx(eps0 * set.t_seq()[k]).epsilon(1e-9));
          if (j > 0) CHECK(lv[j].left >= lv[j - 1].right - 1e-15);
          const auto& P = parent[j / 2];
          CHECK(lv[j].left >= P.left - 1e-15);
          CHECK(lv[j].right <= P.right + 1e-15);
        }
      }
    }
  }
}

TEST_CASE("cantor measure") {
  const auto f = ScaleFunction::power(0.5);
  const auto small = cantor_measure(build_cantor(f, 1.0, 3));
  CHECK(small.size() == 8);
  for (double w : small.weights) CHECK(w == 0.125);
  small.validate();

  const auto set = build_cantor(f, 0.5, 12);
  const auto nu = cantor_measure(set);
  const auto lv1 = set.level(1);
  double left = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i)
    if (nu.coords[i] >= lv1[0].left && nu.coords[i] <= lv1[0].right) left += nu.weights[i];
  CHECK(left == Approx(0.5).epsilon(1e-14));

  testsupport::Gen gen(32);
  const double r_lo = std::pow(2.0, -(set.depth() - 1) / set.zeta());
  const double r_hi = f.eval(set.eps0());
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    const double t = nu.coords[static_cast<std::size_t>(gen.integer(0, static_cast<int>(nu.size()) - 1))];
    const double r = gen.log_uniform(r_lo, r_hi);
    if (time_ball_mass(nu, t, r, f) > 8.0 * std::pow(r, set.zeta())) ++violations;
  }
  CHECK(violations == 0);

  // Level-k covers certify content <= 2^zeta.
  for (int k = 0; k <= 10; ++k) {
    double sum = 0.0;
    for (const auto& iv : set.level(k)) sum += std::pow(2.0 * f.eval(iv.length()), set.zeta());
    CHECK(sum <= std::pow(2.0, set.zeta()) * (1 + 1e-9));
  }
}

TEST_CASE("gamma-dyadic covers") {
  const auto f = ScaleFunction::power(0.5);
  for (int n : {1, 3, 6}) {
    const double w = std::pow(4.0, -n);
    CHECK(gamma_dyadic_cover(IntervalUnion{{{0.0, w}}}, n, f).count() == 1);
  }
  CHECK(gamma_dyadic_cover(IntervalUnion{{{0.0, 1.0}}}, 3, ScaleFunction::power(1.0)).count() == 8);
  const auto cov = gamma_dyadic_cover(IntervalUnion{{{0.0, 1.0}}}, 3, ScaleFunction::power(1.0));
  CHECK(cov.intervals().size() == 8);
  CHECK(cov.intervals().back().right == Approx(1.0));
  const std::vector<double> pts{0.1, 0.11, 0.9};
  CHECK(gamma_dyadic_cover(pts, 3, ScaleFunction::power(1.0)).count() == 2);
  CHECK(gamma_dyadic_log2_count(IntervalUnion{{{0.0, 1.0}}}, 3, ScaleFunction::power(1.0)) == Approx(3.0));

  // Slow families: counts remain finite in log2 even when tiles underflow.
  const double big = gamma_dyadic_log2_count(IntervalUnion{{{0.2, 0.4}}}, 30, ScaleFunction::log_scale(1.0));
  CHECK(std::isfinite(big));
  CHECK(big > 1e6);
}

TEST_CASE("cantor tile counts grow like 2^(n zeta)") {
  const auto f = ScaleFunction::power(0.5);
  for (double zeta : {0.5, 1.0}) {
    const auto set = build_cantor(f, zeta, 14);
    std::vector<double> xs, ys;
    for (int n = 2; n <= 10; ++n) {
      xs.push_back(n);
      ys.push_back(std::log2(static_cast<double>(gamma_dyadic_cover(set, n).count())));
    }
    CHECK(numerics::fit_line(xs, ys).slope == Approx(zeta).epsilon(0.05));
  }
  // The descent agrees with enumerating the deepest level.
  const auto set = build_cantor(f, 0.7, 9);
  std::vector<double> mids;
  IntervalUnion u;
  for (const auto& iv : set.level(9)) u.parts.push_back(iv);
  for (int n = 1; n <= 8; ++n) CHECK(gamma_dyadic_cover(set, n).count() == gamma_dyadic_cover(u, n, f).count());
}

TEST_CASE("covering and packing numbers") {
  const auto lin = MetricModel::stationary(ScaleFunction::power(1.0));
  const std::vector<double> one{0.3};
  CHECK(covering_number_delta(one, 0.01, lin) == 1);
  CHECK(packing_number_delta(one, 0.01, lin) == 1);
  std::vector<double> grid(1001);
  for (int i = 0; i <= 1000; ++i) grid[i] = i / 1000.0;
  for (int k : {2, 5, 10, 25}) {
    const auto c = static_cast<long>(covering_number_delta(grid, 1.0 / (2 * k), lin));
    CHECK(std::abs(c - k) <= 1);
  }

  testsupport::Gen gen(41);
  int bad = 0;
  for (const auto& f : testsupport::registry()) {
    if (!f.concave_near_zero()) continue;
    const auto m = MetricModel::stationary(f);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> E(static_cast<std::size_t>(gen.integer(1, 300)));
      for (auto& t : E) t = gen.uniform(0.0, f.concavity_limit());
      const double r = gen.log_uniform(1e-3, 0.5) * f.eval(f.concavity_limit());
      if (covering_number_delta(E, 2 * r, m) > packing_number_delta(E, r, m)) ++bad;
    }
  }
  CHECK(bad == 0);

  // Covariance-backed counts track the analytic ones.
  const auto g = ScaleFunction::power(0.5);
  std::vector<double> tg;
  for (int i = 1; i <= 200; ++i) tg.push_back(i / 200.0);
  auto cov = std::make_shared<CovMatrix>(cov_stationary_increments(g, tg));
  const auto fc = MetricModel::from_covariance(cov);
  const auto st = MetricModel::stationary(g);
  for (double r : {0.075, 0.11, 0.31}) {
    const double a = static_cast<double>(covering_number_delta(tg, r, fc));
    const double b = static_cast<double>(covering_number_delta(tg, r, st));
    CHECK(std::abs(a - b) <= 0.1 * b + 1);
    CHECK(covering_number_delta(tg, 2 * r, fc) <= packing_number_delta(tg, r, fc));
  }
}
