#pragma once

#include <span>
#include <vector>

namespace gpfractal {

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
};

struct Ball {
  std::vector<double> center;
  double radius = 0.0;
};

/// Target set F ⊂ R^d: a finite union of closed axis-aligned boxes and closed balls.
class SpatialSet {
 public:
  explicit SpatialSet(std::size_t dim) : dim_(dim) {}

  SpatialSet& add_box(Box b);
  SpatialSet& add_ball(Ball b);

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<Box>& boxes() const noexcept { return boxes_; }
  const std::vector<Ball>& balls() const noexcept { return balls_; }
  bool empty() const noexcept { return boxes_.empty() && balls_.empty(); }

  /// Euclidean distance from x to the set (0 inside).
  double distance(std::span<const double> x) const;
  /// Largest number of nondegenerate box sides; d for balls of positive radius.
  double dim_euclidean() const;
  /// Upper bound on the number of grid cells of side s meeting F (balls counted by their bounding box).
  double box_count(double s) const;
  /// Lattice points of spacing h inside F (at least the box corners / ball centers).
  std::vector<double> sample(double h) const;

 private:
  std::size_t dim_;
  std::vector<Box> boxes_;
  std::vector<Ball> balls_;
};

}  // namespace gpfractal
