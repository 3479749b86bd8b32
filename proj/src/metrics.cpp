#include "gpfractal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gpfractal/errors.hpp"

namespace gpfractal {

MetricModel MetricModel::stationary(ScaleFunction f) { return MetricModel(std::move(f)); }

MetricModel MetricModel::from_covariance(std::shared_ptr<const CovMatrix> cov) {
  if (!cov) throw DomainError("MetricModel: null covariance");
  return MetricModel(std::move(cov));
}

const CovMatrix* MetricModel::covariance() const noexcept {
  const auto* p = std::get_if<std::shared_ptr<const CovMatrix>>(&backend_);
  return p ? p->get() : nullptr;
}

double MetricModel::delta_index(std::size_t i, std::size_t j) const {
  const CovMatrix* cov = covariance();
  if (!cov) throw DomainError("delta_index: model is not covariance-backed");
  if (i == j) return 0.0;
  const double d2 = (*cov)(i, i) + (*cov)(j, j) - 2.0 * (*cov)(i, j);
  if (d2 < -1e-10) throw NumericalError("delta: negative squared increment " + std::to_string(d2));
  return std::sqrt(std::max(0.0, d2));
}

double MetricModel::delta(double s, double t) const {
  if (const ScaleFunction* f = scale()) return s == t ? 0.0 : f->eval(std::abs(t - s));
  const CovMatrix* cov = covariance();
  return delta_index(cov->index_of(s), cov->index_of(t));
}

double euclidean_distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("dimension mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += (x[k] - y[k]) * (x[k] - y[k]);
  return std::sqrt(s);
}

double MetricModel::rho(double s, std::span<const double> x, double t, std::span<const double> y) const {
  return std::max(delta(s, t), euclidean_distance(x, y));
}

CommensurabilityReport commensurability_report(const CovMatrix& cov, const ScaleFunction& f) {
  const auto& g = cov.grid();
  if (g.back() - g.front() > f.x_max() * (1.0 + 1e-12)) throw DomainError("commensurability: grid span exceeds x_max");
  const auto model = MetricModel::from_covariance(std::shared_ptr<const CovMatrix>(&cov, [](const CovMatrix*) {}));
  CommensurabilityReport rep;
  rep.ratio_min = std::numeric_limits<double>::infinity();
  rep.ratio_max = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = i + 1; j < g.size(); ++j) {
      const double ratio = model.delta_index(i, j) / f.eval(g[j] - g[i]);
      ++rep.n_pairs;
      if (ratio < rep.ratio_min) {
        rep.ratio_min = ratio;
        rep.argmin_s = g[i];
        rep.argmin_t = g[j];
      }
      if (ratio > rep.ratio_max) {
        rep.ratio_max = ratio;
        rep.argmax_s = g[i];
        rep.argmax_t = g[j];
      }
    }
  }
  if (rep.n_pairs == 0) {
    rep.ratio_min = rep.ratio_max = 1.0;
    return rep;
  }
  const double m = std::max(rep.ratio_max, 1.0 / rep.ratio_min);
  rep.l_hat = std::max(1.0, m * m);
  return rep;
}

}  // namespace gpfractal
