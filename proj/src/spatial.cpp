#include "gpfractal/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gpfractal/errors.hpp"

namespace gpfractal {

SpatialSet& SpatialSet::add_box(Box b) {
  if (b.lo.size() != dim_ || b.hi.size() != dim_) throw DomainError("box dimension mismatch");
  for (std::size_t k = 0; k < dim_; ++k) {
    if (!(b.lo[k] <= b.hi[k])) throw DomainError("box with lo > hi");
  }
  boxes_.push_back(std::move(b));
  return *this;
}

SpatialSet& SpatialSet::add_ball(Ball b) {
  if (b.center.size() != dim_) throw DomainError("ball dimension mismatch");
  if (!(b.radius >= 0.0)) throw DomainError("ball radius must be >= 0");
  balls_.push_back(std::move(b));
  return *this;
}

double SpatialSet::distance(std::span<const double> x) const {
  if (x.size() != dim_) throw DomainError("point dimension mismatch");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& b : boxes_) {
    double s = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) {
      const double g = std::max({b.lo[k] - x[k], 0.0, x[k] - b.hi[k]});
      s += g * g;
    }
    best = std::min(best, std::sqrt(s));
  }
  for (const auto& b : balls_) {
    double s = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) s += (x[k] - b.center[k]) * (x[k] - b.center[k]);
    best = std::min(best, std::max(0.0, std::sqrt(s) - b.radius));
  }
  return best;
}

double SpatialSet::dim_euclidean() const {
  double d = 0.0;
  for (const auto& b : boxes_) {
    double sides = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) sides += b.hi[k] > b.lo[k] ? 1.0 : 0.0;
    d = std::max(d, sides);
  }
  for (const auto& b : balls_) d = std::max(d, b.radius > 0.0 ? static_cast<double>(dim_) : 0.0);
  return d;
}

double SpatialSet::box_count(double s) const {
  if (!(s > 0.0)) throw DomainError("box_count: scale must be positive");
  auto cells = [&](const std::vector<double>& lo, const std::vector<double>& hi) {
    double c = 1.0;
    for (std::size_t k = 0; k < dim_; ++k) c *= std::floor(hi[k] / s) - std::floor(lo[k] / s) + 1.0;
    return c;
  };
  double total = 0.0;
  for (const auto& b : boxes_) total += cells(b.lo, b.hi);
  for (const auto& b : balls_) {
    std::vector<double> lo(dim_), hi(dim_);
    for (std::size_t k = 0; k < dim_; ++k) {
      lo[k] = b.center[k] - b.radius;
      hi[k] = b.center[k] + b.radius;
    }
    total += cells(lo, hi);
  }
  return total;
}

std::vector<double> SpatialSet::sample(double h) const {
  if (!(h > 0.0)) throw DomainError("sample: spacing must be positive");
  std::vector<double> out;
  auto lattice = [&](const std::vector<double>& lo, const std::vector<double>& hi, auto&& keep) {
    std::vector<std::size_t> n(dim_);
    std::size_t total = 1;
    for (std::size_t k = 0; k < dim_; ++k) {
      n[k] = static_cast<std::size_t>(std::floor((hi[k] - lo[k]) / h)) + 1;
      total *= n[k];
      if (total > 50'000'000) throw DomainError("sample: too many lattice points");
    }
    std::vector<double> x(dim_);
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t rem = idx;
      for (std::size_t k = 0; k < dim_; ++k) {
        x[k] = lo[k] + h * static_cast<double>(rem % n[k]);
        rem /= n[k];
      }
      if (keep(x)) out.insert(out.end(), x.begin(), x.end());
    }
  };
  for (const auto& b : boxes_) lattice(b.lo, b.hi, [](const std::vector<double>&) { return true; });
  for (const auto& b : balls_) {
    std::vector<double> lo(dim_), hi(dim_);
    for (std::size_t k = 0; k < dim_; ++k) {
      lo[k] = b.center[k] - b.radius;
      hi[k] = b.center[k] + b.radius;
    }
    const std::size_t before = out.size();
    lattice(lo, hi, [&](const std::vector<double>& x) {
      double s = 0.0;
      for (std::size_t k = 0; k < dim_; ++k) s += (x[k] - b.center[k]) * (x[k] - b.center[k]);
      return s <= b.radius * b.radius;
    });
    if (out.size() == before) out.insert(out.end(), b.center.begin(), b.center.end());
  }
  return out;
}

}  // namespace gpfractal
