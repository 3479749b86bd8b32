#include <cmath>
#include <memory>

#include "doctest.h"
#include "gpfractal/errors.hpp"
#include "gpfractal/metrics.hpp"
#include "support.hpp"

using namespace gpfractal;
using doctest::Approx;

TEST_CASE("delta examples") {
  const auto st = MetricModel::stationary(ScaleFunction::power(0.5));
  CHECK(st.delta(0.1, 0.35) == Approx(0.5).epsilon(1e-14));
  CHECK(st.delta(0.3, 0.3) == 0.0);
  const std::vector<double> grid{0.1, 0.35, 0.8};
  auto cov = std::make_shared<CovMatrix>(cov_stationary_increments(ScaleFunction::power(0.5), grid));
  const auto fc = MetricModel::from_covariance(cov);
  CHECK(fc.delta(0.1, 0.35) == Approx(0.5).epsilon(1e-14));
  CHECK(fc.delta(0.35, 0.35) == 0.0);
  CHECK(fc.delta(0.35, 0.1) == fc.delta(0.1, 0.35));
  CHECK_THROWS_AS(fc.delta(0.1, 0.3), DomainError);
}

TEST_CASE("rho examples") {
  const auto st = MetricModel::stationary(ScaleFunction::power(0.5));
  const std::vector<double> x{0.0, 0.0}, y{0.2, 0.0}, z{0.0};
  CHECK(st.rho(0.2, x, 0.2, x) == 0.0);
  CHECK(st.rho(0.1, x, 0.35, y) == Approx(0.5));
  CHECK(st.rho(0.1, x, 0.11, y) == Approx(0.2));
  CHECK_THROWS_AS(st.rho(0.1, x, 0.2, z), DomainError);
}

TEST_CASE("property: triangle inequalities") {
  testsupport::Gen gen(5);
  for (const auto& f : testsupport::registry()) {
    if (!f.concave_near_zero()) continue;
    CAPTURE(f.spec());
    const auto m = MetricModel::stationary(f);
    const double span = f.concavity_limit();
    int bad_delta = 0, bad_rho = 0;
    for (int k = 0; k < 1000; ++k) {
      const double s = gen.uniform(0, span), t = gen.uniform(0, span), u = gen.uniform(0, span);
      if (m.delta(s, u) > m.delta(s, t) + m.delta(t, u) + 1e-12) ++bad_delta;
      std::vector<double> x{gen.normal(), gen.normal()}, y{gen.normal(), gen.normal()}, w{gen.normal(), gen.normal()};
      if (m.rho(s, x, u, w) > m.rho(s, x, t, y) + m.rho(t, y, u, w) + 1e-12) ++bad_rho;
    }
    CHECK(bad_delta == 0);
    CHECK(bad_rho == 0);
  }
}

TEST_CASE("covariance-backed delta matches the stationary model") {
  for (const auto& f : testsupport::registry()) {
    CAPTURE(f.spec());
    const double b = f.variance_concavity_limit();
    if (b == 0.0) continue;
    const auto grid = uniform_grid(0.1 * b, b, 20);
    auto cov = std::make_shared<CovMatrix>(cov_stationary_increments(f, grid));
    const auto fc = MetricModel::from_covariance(cov);
    const auto st = MetricModel::stationary(f);
    for (double s : grid)
      for (double t : grid) CHECK(fc.delta(s, t) == Approx(st.delta(s, t)).epsilon(1e-7).scale(1e-7));
    const auto rep = commensurability_report(*cov, f);
    CHECK(rep.l_hat == Approx(1.0).epsilon(1e-8));
    CHECK(rep.n_pairs == 190);
  }
}
