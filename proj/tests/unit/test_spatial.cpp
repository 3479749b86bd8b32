#include <cmath>

#include "doctest.h"
#include "gpfractal/errors.hpp"
#include "gpfractal/spatial.hpp"

using namespace gpfractal;
using doctest::Approx;

TEST_CASE("spatial sets") {
  SpatialSet F(2);
  F.add_box({{0.0, 0.0}, {1.0, 1.0}}).add_ball({{3.0, 0.0}, 0.5});
  const std::vector<double> inside{0.5, 0.5}, right{2.0, 0.5}, near_ball{3.0, 1.0};
  CHECK(F.distance(inside) == 0.0);
  CHECK(F.distance(right) == Approx(std::min(1.0, std::hypot(1.0, 0.5) - 0.5)));
  CHECK(F.distance(near_ball) == Approx(0.5));
  CHECK(F.dim_euclidean() == 2.0);
  CHECK(F.box_count(0.5) >= 9.0);
  CHECK_THROWS_AS(F.add_box({{0.0}, {1.0}}), DomainError);
  CHECK_THROWS_AS(F.add_ball({{0.0, 0.0}, -1.0}), DomainError);
  SpatialSet seg(2);
  seg.add_box({{0.0, 0.0}, {1.0, 0.0}});
  CHECK(seg.dim_euclidean() == 1.0);
  CHECK(seg.sample(0.25).size() == 5 * 2);
}
