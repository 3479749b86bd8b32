#include "gpfractal/hitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "gpfractal/conditions.hpp"
#include "gpfractal/errors.hpp"
#include "gpfractal/format.hpp"
#include "gpfractal/numerics.hpp"

namespace gpfractal {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double max_step(const TimeSet& E, std::span<const double> grid) {
  if (const auto* c = std::get_if<CantorSet>(&E)) return c->eps0() * c->t_seq().back();
  const auto& parts = std::get<IntervalUnion>(E).parts;
  double step = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    for (const auto& p : parts) {
      if (grid[i - 1] >= p.left && grid[i] <= p.right) {
        step = std::max(step, grid[i] - grid[i - 1]);
        break;
      }
    }
  }
  return step;
}

MetricModel model_for(const ScaleFunction& f, std::span<const double> times, CovKind kind) {
  if (kind == CovKind::StationaryIncrements) return MetricModel::stationary(f);
  return MetricModel::from_covariance(std::make_shared<const CovMatrix>(build_covariance(f, times, kind)));
}

// At most `count` entries, evenly picked and keeping both ends.
std::vector<double> thin(const std::vector<double>& all, std::size_t count) {
  if (all.size() <= count || count < 2) return all;
  std::vector<double> out;
  for (std::size_t k = 0; k < count; ++k) out.push_back(all[k * (all.size() - 1) / (count - 1)]);
  return out;
}

}  // namespace

double grid_guard(const ScaleFunction& f, const TimeSet& E, std::span<const double> grid, std::size_t d) {
  if (grid.size() < 2) return 0.0;
  const double step = max_step(E, grid);
  if (step <= 0.0) return 0.0;
  const double n = static_cast<double>(grid.size());
  return 3.0 * f.eval(std::min(step, f.x_max())) * std::sqrt(2.0 * std::log(n)) * std::sqrt(static_cast<double>(d));
}

double HitProbReport::p_at(double t) const {
  if (min_distance.empty()) return 0.0;
  const auto hits_at = std::count_if(min_distance.begin(), min_distance.end(), [&](double m) { return m <= t; });
  return static_cast<double>(hits_at) / static_cast<double>(min_distance.size());
}

std::vector<HitProbReport> hit_probability_mc(const ScaleFunction& f, const TimeSet& E, std::span<const SpatialSet> targets,
                                              std::size_t d, std::span<const double> tols, std::size_t n_paths,
                                              std::uint64_t seed, const HitOptions& opt) {
  if (d == 0 || n_paths == 0) throw DomainError("hit probability: d and n_paths must be positive");
  if (targets.empty() || targets.size() != tols.size()) throw DomainError("hit probability: one tol per target set");
  const auto grid = time_grid(E, opt.grid_n);
  const double guard = grid_guard(f, E, grid, d);
  for (std::size_t k = 0; k < targets.size(); ++k) {
    if (targets[k].dim() != d) throw DomainError("hit probability: F lives in the wrong dimension");
    if (targets[k].empty()) throw DomainError("hit probability: F is empty");
    if (!(tols[k] >= 0.0)) throw DomainError("hit probability: tol must be nonnegative");
    if (!opt.skip_guard && tols[k] < guard) {
      throw DomainError("grid too coarse for tol: tol = " + format_double(tols[k]) + " is below the guard " + format_double(guard));
    }
  }
  const auto cov = build_covariance(f, grid, opt.kind);
  const PathSampler sampler(cov, d, seed);
  const std::size_t n = grid.size();
  std::vector<HitProbReport> out(targets.size());
  for (std::size_t k = 0; k < targets.size(); ++k) {
    auto& rep = out[k];
    rep.guard = guard;
    rep.tol = tols[k];
    rep.grid_n = n;
    rep.d = d;
    rep.seed = seed;
    rep.n_paths = n_paths;
    rep.capacity_term = kNaN;
    rep.content_term = kNaN;
    rep.min_distance.assign(n_paths, std::numeric_limits<double>::infinity());
  }
  sampler.for_each_block(n_paths, [&](std::size_t first, std::size_t count, std::span<const double> v) {
    for (std::size_t k = 0; k < targets.size(); ++k) {
      for (std::size_t p = 0; p < count; ++p) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n && best > 0.0; ++i) best = std::min(best, targets[k].distance(v.subspan((p * n + i) * d, d)));
        out[k].min_distance[first + p] = best;
      }
    }
  });
  for (auto& rep : out) {
    rep.hits = static_cast<std::size_t>(
        std::count_if(rep.min_distance.begin(), rep.min_distance.end(), [&](double m) { return m <= rep.tol; }));
    rep.p_hat = static_cast<double>(rep.hits) / static_cast<double>(n_paths);
    const auto ci = numerics::wilson_interval(rep.hits, n_paths);
    rep.ci_low = std::min(ci.low, rep.p_hat);
    rep.ci_high = std::max(ci.high, rep.p_hat);
  }
  return out;
}

HitProbReport hit_probability_mc(const ScaleFunction& f, const TimeSet& E, const SpatialSet& F, std::size_t d, double tol,
                                 std::size_t n_paths, std::uint64_t seed, const HitOptions& opt) {
  return std::move(hit_probability_mc(f, E, std::span<const SpatialSet>(&F, 1), d, std::span<const double>(&tol, 1), n_paths,
                                      seed, opt)
                       .front());
}

SmallBallReport small_ball_mc(const ScaleFunction& f, double a, double b, double t0, double r, std::span<const double> z,
                              std::size_t n_paths, std::uint64_t seed, std::size_t window_n, CovKind kind) {
  if (!(a > 0.0 && a <= b)) throw DomainError("small ball: need 0 < a <= b");
  if (!(t0 >= a && t0 <= b)) throw DomainError("small ball: empty delta-ball on the grid (t0 outside [a, b])");
  if (!(r > 0.0)) throw DomainError("small ball: r must be positive");
  if (z.empty() || n_paths == 0 || window_n == 0) throw DomainError("small ball: d, n_paths and window_n must be positive");
  const std::size_t d = z.size();
  const double log_r = std::log(r);
  const double half = log_r >= std::log(f.eval(f.x_max())) ? f.x_max() : std::exp(-f.log_inverse(log_r));
  if (!(half > 0.0)) throw NumericalError("small ball: delta-ball half-width underflows double precision");
  SmallBallReport rep;
  rep.r = r;
  rep.n_paths = n_paths;
  // Offsets u from t0; the window can be far narrower than the spacing of doubles near t0.
  const double u_lo = std::max(a - t0, -half), u_hi = std::min(b - t0, half);
  rep.window_lo = t0 + u_lo;
  rep.window_hi = t0 + u_hi;
  std::vector<double> offsets{0.0};
  if (window_n > 1 && u_hi > u_lo) {
    for (std::size_t k = 0; k < window_n; ++k) offsets.push_back(u_lo + (u_hi - u_lo) * static_cast<double>(k) / (window_n - 1));
    std::sort(offsets.begin(), offsets.end());
    offsets.erase(std::unique(offsets.begin(), offsets.end()), offsets.end());
  }
  rep.window_n = offsets.size();
  const std::size_t n = offsets.size();
  auto var_at = [&](double u) {
    if (std::abs(u) > 1e-8 * t0) return f.eval(t0 + u) * f.eval(t0 + u);
    return f.eval(t0) * f.eval(t0) + f.variance_derivative(t0) * u;
  };
  auto cov = [&] {
    if (kind == CovKind::Volterra) {
      std::vector<double> grid;
      for (double u : offsets) grid.push_back(t0 + u);
      for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) throw DomainError("small ball: window unresolvable in absolute time for the Volterra model");
      }
      return build_covariance(f, grid, kind);
    }
    if (t0 + u_hi > f.x_max() * (1.0 + 1e-12)) throw DomainError("small ball: window exceeds x_max");
    Eigen::MatrixXd R(n, n);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = var_at(offsets[i]);
    for (std::size_t i = 0; i < n; ++i) {
      R(i, i) = v[i];
      for (std::size_t j = 0; j < i; ++j) {
        const double g = std::exp(f.log_value_at(-std::log(offsets[i] - offsets[j])));
        R(i, j) = R(j, i) = 0.5 * (v[i] + v[j] - g * g);
      }
    }
    CovMatrix c(offsets, std::move(R));
    c.factorize();
    return c;
  }();
  const PathSampler sampler(cov, d, seed);
  std::vector<std::uint8_t> hit(n_paths, 0);
  sampler.for_each_block(n_paths, [&](std::size_t first, std::size_t count, std::span<const double> v) {
    for (std::size_t p = 0; p < count; ++p) {
      for (std::size_t i = 0; i < n; ++i) {
        if (euclidean_distance(v.subspan((p * n + i) * d, d), z) <= r) {
          hit[first + p] = 1;
          break;
        }
      }
    }
  });
  rep.hits = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
  rep.p_hat = static_cast<double>(rep.hits) / static_cast<double>(n_paths);
  const auto ci = numerics::wilson_interval(rep.hits, n_paths);
  rep.ci_low = std::min(ci.low, rep.p_hat);
  rep.ci_high = std::max(ci.high, rep.p_hat);
  rep.r_pow_d = std::pow(r, static_cast<double>(d));
  try {
    rep.f_term = std::pow(r + f_gamma(f, r), static_cast<double>(d));
  } catch (const DomainError&) {
    rep.f_term = kNaN;
  }
  return rep;
}

SmallBallSweep small_ball_sweep(const ScaleFunction& f, double a, double b, double t0, std::span<const double> radii,
                                std::span<const double> z, std::size_t n_paths, std::uint64_t seed, std::size_t window_n,
                                CovKind kind) {
  SmallBallSweep sw;
  std::vector<double> lr, lp;
  for (double r : radii) {
    sw.points.push_back(small_ball_mc(f, a, b, t0, r, z, n_paths, seed, window_n, kind));
    if (sw.points.back().hits > 0) {
      lr.push_back(std::log(r));
      lp.push_back(std::log(sw.points.back().p_hat));
    }
  }
  if (lr.size() < 2) throw NumericalError("small ball sweep: fewer than two radii with hits; raise n_paths");
  const auto fit = numerics::fit_line(lr, lp);
  sw.slope = fit.slope;
  sw.slope_stderr = fit.slope_stderr;
  return sw;
}

std::vector<double> dyadic_menu(double R, int levels) {
  if (!(R > 0.0) || levels < 1) throw DomainError("dyadic menu: need R > 0 and levels >= 1");
  std::vector<double> m;
  for (int k = 0; k < levels; ++k) m.push_back(std::ldexp(R, -k));
  return m;
}

double hausdorff_content_estimate(std::span<const double> times, std::span<const double> points, std::size_t d, double s,
                                  const MetricModel& model, std::span<const double> menu) {
  if (times.empty() || d == 0 || points.empty() || points.size() % d != 0) throw DomainError("content: empty or malformed set");
  if (menu.empty()) throw DomainError("content: empty radius menu");
  for (double r : menu) {
    if (!(r > 0.0)) throw DomainError("content: radii must be positive");
  }
  const std::size_t nt = times.size(), np = points.size() / d;
  std::vector<double> dt(nt * nt), dx(np * np);
  for (std::size_t i = 0; i < nt; ++i)
    for (std::size_t k = 0; k < nt; ++k) dt[i * nt + k] = model.delta(times[i], times[k]);
  for (std::size_t j = 0; j < np; ++j)
    for (std::size_t l = 0; l < np; ++l) dx[j * np + l] = euclidean_distance(points.subspan(j * d, d), points.subspan(l * d, d));

  auto greedy = [&](std::span<const double> radii) {
    std::vector<std::uint8_t> covered(nt * np, 0);
    std::vector<std::size_t> ts, xs;
    double total = 0.0;
    for (std::size_t anchor = 0; anchor < nt * np; ++anchor) {
      if (covered[anchor]) continue;
      const std::size_t i = anchor / np, j = anchor % np;
      double best_cost = std::numeric_limits<double>::infinity(), best_r = radii.front();
      for (double r : radii) {
        std::size_t count = 0;
        for (std::size_t k = 0; k < nt; ++k) {
          if (dt[i * nt + k] > r) continue;
          for (std::size_t l = 0; l < np; ++l) count += (dx[j * np + l] <= r && !covered[k * np + l]) ? 1 : 0;
        }
        const double cost = std::pow(2.0 * r, s) / static_cast<double>(count);
        if (cost < best_cost) {
          best_cost = cost;
          best_r = r;
        }
      }
      for (std::size_t k = 0; k < nt; ++k) {
        if (dt[i * nt + k] > best_r) continue;
        for (std::size_t l = 0; l < np; ++l) {
          if (dx[j * np + l] <= best_r) covered[k * np + l] = 1;
        }
      }
      total += std::pow(2.0 * best_r, s);
    }
    return total;
  };

  std::vector<double> sorted(menu.begin(), menu.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    best = std::min(best, greedy(std::span<const double>(sorted).first(k + 1)));
    best = std::min(best, greedy(std::span<const double>(sorted).subspan(k, 1)));
  }
  return best;
}

SandwichReport sandwich_report(std::vector<SandwichRow> rows, std::size_t d) {
  if (rows.size() < 6) throw DomainError("sandwich: battery needs at least 6 instances");
  SandwichReport rep;
  rep.C1 = std::numeric_limits<double>::infinity();
  rep.C2 = 0.0;
  bool any_lower = false;
  for (auto& row : rows) {
    row.critical = std::abs(row.dim_rho - static_cast<double>(d)) <= 0.15;
    if (row.critical) continue;
    if (row.hit.capacity_term > 0.0) {
      rep.C1 = std::min(rep.C1, row.hit.p_hat / row.hit.capacity_term);
      any_lower = true;
    }
    if (row.hit.content_term > 0.0) rep.C2 = std::max(rep.C2, row.hit.p_hat / row.hit.content_term);
  }
  if (!any_lower) rep.C1 = 0.0;
  rep.pass = true;
  for (auto& row : rows) {
    if (row.critical) continue;
    const auto& h = row.hit;
    // A positive capacity must come with a hit probability whose interval excludes 0.
    row.lower_ok = rep.C1 * h.capacity_term <= h.ci_high && (h.capacity_term > 0.0) == (h.ci_low > 0.0);
    row.upper_ok = h.p_hat <= rep.C2 * h.content_term * (1.0 + 1e-12);
    rep.pass = rep.pass && row.lower_ok && row.upper_ok;
  }
  rep.rows = std::move(rows);
  return rep;
}

SandwichReport run_battery(const ScaleFunction& f, std::size_t d, std::span<const BatteryInstance> battery,
                           const BatteryOptions& opt) {
  std::vector<SandwichRow> rows(battery.size());
  // Instances with the same simulation grid, seed and path count share one set of paths.
  std::vector<bool> done(battery.size(), false);
  for (std::size_t a = 0; a < battery.size(); ++a) {
    if (done[a]) continue;
    const auto grid_a = time_grid(battery[a].E, opt.hit.grid_n);
    std::vector<std::size_t> group;
    for (std::size_t b = a; b < battery.size(); ++b) {
      if (done[b] || battery[b].seed != battery[a].seed || battery[b].n_paths != battery[a].n_paths) continue;
      if (b != a && time_grid(battery[b].E, opt.hit.grid_n) != grid_a) continue;
      group.push_back(b);
      done[b] = true;
    }
    std::vector<SpatialSet> targets;
    std::vector<double> tols;
    for (std::size_t b : group) {
      targets.push_back(battery[b].F);
      tols.push_back(battery[b].tol);
    }
    auto hits = hit_probability_mc(f, battery[a].E, targets, d, tols, battery[a].n_paths, battery[a].seed, opt.hit);
    for (std::size_t g = 0; g < group.size(); ++g) rows[group[g]].hit = std::move(hits[g]);
  }

  for (std::size_t b = 0; b < battery.size(); ++b) {
    const auto& inst = battery[b];
    auto& row = rows[b];
    row.label = inst.label;
    row.dim_rho = std::isnan(inst.dim_rho) ? dim_rho_product(inst.E, inst.F, f).value : inst.dim_rho;

    const auto times = thin(time_grid(inst.E, opt.term_times), opt.term_times);
    const auto model = model_for(f, times, opt.hit.kind);
    // Coarsen the spatial lattice until F has at most max_space_points points.
    double hs = opt.term_space_h;
    auto pts = inst.F.sample(hs);
    while (pts.size() / d > opt.max_space_points) {
      hs *= 1.1;
      pts = inst.F.sample(hs);
    }
    const double h = opt.capacity_h;
    const std::vector<double> res{2.0 * h, std::sqrt(2.0) * h, h};
    const auto cap = product_capacity_estimate(times, pts, d, model, static_cast<double>(d), res);
    if (cap.verdict == CapacityVerdict::Positive) {
      row.hit.capacity_term = cap.extrapolated;
    } else if (cap.verdict == CapacityVerdict::Zero) {
      row.hit.capacity_term = 0.0;
    } else {
      row.hit.capacity_term = cap.capacity.back();
    }
    // The content cover works on a coarser product set.
    const auto ctimes = thin(times, opt.content_times);
    double hc = hs;
    auto cpts = pts;
    while (cpts.size() / d > opt.content_space_points) {
      hc *= 1.1;
      cpts = inst.F.sample(hc);
    }
    double diam = 0.0;
    for (double t : ctimes) diam = std::max(diam, model.delta(ctimes.front(), t));
    const std::span<const double> ps(cpts);
    for (std::size_t j = 0; j < cpts.size(); j += d)
      for (std::size_t l = 0; l < cpts.size(); l += d) diam = std::max(diam, euclidean_distance(ps.subspan(j, d), ps.subspan(l, d)));
    row.hit.content_term = hausdorff_content_estimate(ctimes, cpts, d, static_cast<double>(d), model,
                                                      dyadic_menu(std::max(diam, 1e-12), opt.menu_levels));
  }
  return sandwich_report(std::move(rows), d);
}

}  // namespace gpfractal
