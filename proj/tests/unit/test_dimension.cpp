#include <cmath>

#include "doctest.h"
#include "gpfractal/dimension.hpp"
#include "gpfractal/errors.hpp"
#include "support.hpp"

using namespace gpfractal;
using doctest::Approx;

TEST_CASE("box counting examples") {
  std::vector<double> seg;
  for (int i = 0; i < 4096; ++i) {
    const double u = i / 4095.0;
    seg.push_back(0.3 + 0.5 * u);
    seg.push_back(-0.2 + 0.25 * u);
  }
  CHECK(box_dimension_euclidean(seg, 2).value == Approx(1.0).epsilon(0.1));

  const std::vector<double> one{0.5, 0.5};
  CHECK(box_dimension_euclidean(one, 2).value == 0.0);

  std::vector<double> sq;
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j) {
      sq.push_back(i / 63.0);
      sq.push_back(j / 63.0);
    }
  const auto est = box_dimension_euclidean(sq, 2);
  CHECK(est.value == Approx(2.0).epsilon(0.05));
  CHECK(est.std_error >= 0.0);
  for (std::size_t i = 1; i < est.counts.size(); ++i) {
    CHECK(est.counts[i].scale < est.counts[i - 1].scale);
    CHECK(est.counts[i].log2_count >= est.counts[i - 1].log2_count);
  }
  CHECK(est.fit_last - est.fit_first + 1 >= 4);

  std::vector<double> few(100 * 2, 0.0);
  for (std::size_t i = 0; i < few.size(); ++i) few[i] = static_cast<double>(i);
  CHECK_THROWS_AS(box_dimension_euclidean(few, 2), DomainError);
}

TEST_CASE("gamma-dyadic dimension of intervals and Cantor sets") {
  for (double H : {0.3, 0.5, 0.75}) {
    const auto est = dim_delta_estimate(IntervalUnion{{{0.2, 1.0}}}, ScaleFunction::power(H));
    CHECK(est.value == Approx(1.0 / H).epsilon(0.05 * H));
    CHECK_FALSE(est.divergent);
  }
  for (double zeta : {0.5, 0.8, 1.0}) {
    const auto est = dim_delta_estimate(build_cantor(ScaleFunction::power(0.5), zeta, 12));
    CAPTURE(zeta);
    CHECK(std::abs(est.value - zeta) <= 0.05);
  }
  const auto ls = dim_delta_estimate(IntervalUnion{{{0.2, 0.4}}}, ScaleFunction::log_scale(1.0));
  CHECK(ls.divergent);
  CHECK(std::isinf(ls.value));
}

TEST_CASE("property: monotone under inclusion and stable under window halving") {
  const auto f = ScaleFunction::power(0.5);
  const auto set = build_cantor(f, 0.7, 12);
  const auto full = dim_delta_estimate(set);
  // Left half of the set: the level-1 left child, itself a Cantor set of the same dimension.
  IntervalUnion left;
  for (const auto& iv : set.level(12)) if (iv.right <= set.level(1)[0].right) left.parts.push_back(iv);
  const auto half = dim_delta_estimate(left, f, std::vector<int>{2, 4, 6, 8, 10, 12, 14, 16});
  CHECK(half.value <= full.value + 2 * std::max(full.std_error, half.std_error) + 0.05);

  std::vector<int> all, inner;
  for (int n = 2; n <= 17; ++n) all.push_back(n);
  for (int n = 6; n <= 13; ++n) inner.push_back(n);
  const auto a = dim_delta_estimate(set, all);
  const auto b = dim_delta_estimate(set, inner);
  CHECK(std::abs(a.value - b.value) <= 2 * std::max(a.std_error, 0.02));
}

TEST_CASE("product dimension sandwich") {
  const auto f = ScaleFunction::power(0.5);
  const TimeSet E = IntervalUnion{{{0.2, 1.0}}};
  SpatialSet F(2);
  F.add_box({{0.0, 0.0}, {0.3, 0.0}});  // a segment: dim 1
  const auto rho = dim_rho_product(E, F, f);
  const auto de = dim_delta_estimate(E, f);
  CHECK(rho.value >= de.value + F.dim_euclidean() - 2 * (rho.std_error + de.std_error) - 0.05);
  CHECK(rho.value <= de.value + F.dim_euclidean() + 2 * (rho.std_error + de.std_error) + 0.05);
  CHECK(rho.method == DimMethod::ProductRho);
}

TEST_CASE("time grids") {
  const auto g = time_grid(TimeSet{IntervalUnion{{{0.2, 0.4}, {0.6, 1.0}}}}, 300);
  CHECK(g.size() == 300);
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
  CHECK_THROWS_AS(time_grid(TimeSet{IntervalUnion{{{0.0, 0.4}}}}, 10), DomainError);
  CHECK_THROWS_AS(time_grid(TimeSet{IntervalUnion{{{0.5, 0.6}, {0.2, 0.3}}}}, 10), DomainError);
  const auto c = time_grid(TimeSet{build_cantor(ScaleFunction::power(0.5), 0.6, 5, 0.8, 0.2)}, 0);
  CHECK(c.size() == 32);
}

TEST_CASE("image dimension experiment, small") {
  const auto rep = image_dimension_experiment(ScaleFunction::power(0.5), IntervalUnion{{{0.2, 1.0}}}, 1, 4, 2048, 7);
  CHECK(rep.per_path.size() == 4);
  CHECK(rep.mean >= 0.85);
  CHECK(rep.mean <= 1.0);
  CHECK(rep.predicted == 1.0);
  const auto again = image_dimension_experiment(ScaleFunction::power(0.5), IntervalUnion{{{0.2, 1.0}}}, 1, 4, 2048, 7);
  CHECK(again.per_path == rep.per_path);
}

TEST_CASE("intersection dimension experiment, small") {
  SpatialSet F(1);
  F.add_box({{0.0}, {0.2}});
  const auto rep = intersection_dimension_experiment(ScaleFunction::power(0.5), IntervalUnion{{{0.2, 1.0}}}, F, 1, 12,
                                                     0.01, 5, 2048);
  CHECK(rep.index_H == Approx(0.5));
  CHECK(rep.lower_bound == Approx(1.0).epsilon(0.1));
  CHECK(rep.upper_bound == Approx(1.0).epsilon(0.1));
  REQUIRE(rep.defined);
  CHECK(rep.max_dim_preimage >= rep.lower_bound - 0.2);
  CHECK(rep.max_dim_preimage <= rep.upper_bound + 0.2);

  SpatialSet far(1);
  far.add_box({{100.0}, {101.0}});
  const auto none = intersection_dimension_experiment(ScaleFunction::power(0.5), IntervalUnion{{{0.2, 1.0}}}, far, 1, 4,
                                                      0.01, 5, 512);
  CHECK(none.hit_rate == 0.0);
  CHECK_FALSE(none.defined);
  CHECK(std::isnan(none.max_dim_preimage));
}
