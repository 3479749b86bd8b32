#include "gpfractal/report.hpp"

#include <cmath>

#include "gpfractal/format.hpp"

namespace gpfractal {

namespace {

std::string_view method_name(DimMethod m) {
  switch (m) {
    case DimMethod::BoxEuclidean:
      return "box_euclidean";
    case DimMethod::GammaDyadic:
      return "gamma_dyadic";
    case DimMethod::ProductRho:
      return "product_rho";
  }
  return "unknown";
}

Json numbers(std::span<const double> v) {
  Json a = Json::array();
  for (double x : v) a.push_back(json_number(x));
  return a;
}

// CSV cell for a double: shortest round-trip form, "nan"/"inf" for non-finite values.
std::string cell(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

// CSV text field, quoted when it holds a comma, quote or newline.
std::string text(const std::string& v) {
  if (v.find_first_of(",\"\n") == std::string::npos) return v;
  std::string q = "\"";
  for (char c : v) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace

Json json_number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json to_json(const DimensionEstimate& e) {
  Json counts = Json::array();
  for (const auto& c : e.counts) counts.push_back({json_number(c.scale), json_number(c.log2_count)});
  return {{"method", method_name(e.method)},
          {"value", json_number(e.divergent ? INFINITY : e.value)},
          {"stderr", json_number(e.std_error)},
          {"window", {json_number(e.scale_min), json_number(e.scale_max)}},
          {"fit_range", {e.fit_first, e.fit_last}},
          {"divergent", e.divergent},
          {"counts_log2", counts}};
}

Json to_json(const ImageDimensionReport& r) {
  return {{"d", r.d},
          {"n_paths", r.n_paths},
          {"grid_n", r.grid_n},
          {"seed", r.seed},
          {"mean", json_number(r.mean)},
          {"sd", json_number(r.sd)},
          {"min", json_number(r.min)},
          {"max", json_number(r.max)},
          {"predicted", json_number(r.predicted)},
          {"dim_delta", to_json(r.dim_delta)},
          {"per_path", numbers(r.per_path)}};
}

Json to_json(const IntersectionReport& r) {
  Json hits = Json::array();
  for (auto h : r.hit) hits.push_back(h != 0);
  return {{"d", r.d},
          {"n_paths", r.n_paths},
          {"grid_n", r.grid_n},
          {"tol", r.tol},
          {"seed", r.seed},
          {"hit_rate", json_number(r.hit_rate)},
          {"defined", r.defined},
          {"max_dim_preimage", json_number(r.max_dim_preimage)},
          {"max_dim_image", json_number(r.max_dim_image)},
          {"index_H", json_number(r.index_H)},
          {"dim_E", json_number(r.dim_E)},
          {"dim_F", json_number(r.dim_F)},
          {"dim_rho", json_number(r.dim_rho)},
          {"lower_bound", json_number(r.lower_bound)},
          {"upper_bound", json_number(r.upper_bound)},
          {"hit", hits},
          {"hit_points", r.hit_points},
          {"dim_preimage", numbers(r.dim_preimage)},
          {"dim_image", numbers(r.dim_image)}};
}

Json to_json(const CommensurabilityReport& r) {
  return {{"l_hat", json_number(r.l_hat)},
          {"ratio_min", json_number(r.ratio_min)},
          {"ratio_max", json_number(r.ratio_max)},
          {"n_pairs", r.n_pairs},
          {"argmin", {r.argmin_s, r.argmin_t}},
          {"argmax", {r.argmax_s, r.argmax_t}}};
}

Json to_json(const CantorSet& set, int level) {
  const int k = level < 0 ? set.depth() : level;
  Json intervals = Json::array();
  for (const auto& iv : set.level(k)) intervals.push_back({iv.left, iv.right});
  return {{"gamma", set.scale().spec()},
          {"zeta", set.zeta()},
          {"depth", set.depth()},
          {"eps0", set.eps0()},
          {"origin", set.origin()},
          {"t", numbers(set.t_seq())},
          {"l", numbers(std::span(set.l_seq()).subspan(1))},
          {"level", k},
          {"intervals", intervals}};
}

Json to_json(const CapacityReport& r) {
  return {{"beta", r.beta},
          {"resolutions", numbers(r.resolutions)},
          {"atoms", r.atoms},
          {"e_min", numbers(r.e_min)},
          {"gaps", numbers(r.gaps)},
          {"iterations", r.iterations},
          {"capacity", numbers(r.capacity)},
          {"decay_slope", json_number(r.decay_slope)},
          {"convergence_order", json_number(r.convergence_order)},
          {"verdict", verdict_name(r.verdict)},
          {"extrapolated", json_number(r.extrapolated)}};
}

Json to_json(const ConditionVerdict& v) {
  return {{"condition", condition_name(v.condition)},
          {"eps", v.eps},
          {"verdict", verdict_name(v.verdict)},
          {"fitted_constant", json_number(v.fitted_constant)},
          {"open", v.open_case},
          {"L_grid", numbers(v.L_grid)},
          {"log_ratios", numbers(v.log_ratios)}};
}

Json to_json(const HitProbReport& r) {
  return {{"p_hat", r.p_hat},
          {"ci", {r.ci_low, r.ci_high}},
          {"hits", r.hits},
          {"n_paths", r.n_paths},
          {"tol", r.tol},
          {"guard", r.guard},
          {"grid_n", r.grid_n},
          {"d", r.d},
          {"seed", r.seed},
          {"capacity_term", json_number(r.capacity_term)},
          {"content_term", json_number(r.content_term)}};
}

Json to_json(const SmallBallSweep& s) {
  Json pts = Json::array();
  for (const auto& p : s.points) {
    pts.push_back({{"r", p.r},
                   {"p_hat", p.p_hat},
                   {"ci", {p.ci_low, p.ci_high}},
                   {"hits", p.hits},
                   {"n_paths", p.n_paths},
                   {"window", {p.window_lo, p.window_hi}},
                   {"window_n", p.window_n},
                   {"r_pow_d", json_number(p.r_pow_d)},
                   {"f_term", json_number(p.f_term)}});
  }
  return {{"slope", json_number(s.slope)}, {"slope_stderr", json_number(s.slope_stderr)}, {"points", pts}};
}

Json to_json(const SandwichReport& s) {
  Json rows = Json::array();
  for (const auto& r : s.rows) {
    rows.push_back({{"label", r.label},
                    {"hit", to_json(r.hit)},
                    {"dim_rho", json_number(r.dim_rho)},
                    {"critical", r.critical},
                    {"lower_ok", r.lower_ok},
                    {"upper_ok", r.upper_ok}});
  }
  return {{"C1", json_number(s.C1)}, {"C2", json_number(s.C2)}, {"pass", s.pass}, {"rows", rows}};
}

Json to_json(const TimeSet& E) {
  if (const auto* iu = std::get_if<IntervalUnion>(&E)) {
    Json parts = Json::array();
    for (const auto& iv : iu->parts) parts.push_back({iv.left, iv.right});
    return {{"intervals", parts}};
  }
  const auto& c = std::get<CantorSet>(E);
  return {{"cantor", {{"zeta", c.zeta()}, {"depth", c.depth()}, {"eps0", c.eps0()}, {"origin", c.origin()}}}};
}

Json to_json(const SpatialSet& F) {
  Json boxes = Json::array();
  for (const auto& b : F.boxes()) boxes.push_back({{"lo", b.lo}, {"hi", b.hi}});
  Json balls = Json::array();
  for (const auto& b : F.balls()) balls.push_back({{"center", b.center}, {"radius", b.radius}});
  return {{"boxes", boxes}, {"balls", balls}};
}

void write_counts_csv(const DimensionEstimate& e, long path, std::ostream& out, bool header) {
  if (header) out << "scale,count,path\n";
  for (const auto& c : e.counts) {
    const double n = std::exp2(c.log2_count);
    out << cell(c.scale) << ',' << cell(n < 9e15 ? std::round(n) : n) << ',' << path << '\n';
  }
}

void write_atoms_csv(const DiscreteMeasure& m, std::ostream& out) {
  out << "t,weight\n";
  for (std::size_t i = 0; i < m.size(); ++i) out << cell(m.coords[i * m.dim]) << ',' << cell(m.weights[i]) << '\n';
}

void write_capacity_csv(const CapacityReport& r, std::ostream& out) {
  out << "resolution,atoms,e_min,gap,iterations,capacity\n";
  for (std::size_t k = 0; k < r.resolutions.size(); ++k) {
    out << cell(r.resolutions[k]) << ',' << r.atoms[k] << ',' << cell(r.e_min[k]) << ',' << cell(r.gaps[k]) << ','
        << r.iterations[k] << ',' << cell(r.capacity[k]) << '\n';
  }
}

void write_capacity_trace_csv(const CapacityReport& r, std::ostream& out) {
  out << "resolution,iteration,energy,gap,away\n";
  for (std::size_t k = 0; k < r.traces.size(); ++k) {
    for (const auto& row : r.traces[k]) {
      out << cell(r.resolutions[k]) << ',' << row.iteration << ',' << cell(row.energy) << ',' << cell(row.gap) << ','
          << (row.away ? 1 : 0) << '\n';
    }
  }
}

void write_verdict_row_csv(const std::string& family, const ConditionVerdict& v, std::ostream& out, bool header) {
  if (header) out << "family,condition,eps,verdict,constant,open\n";
  out << text(family) << ',' << condition_name(v.condition) << ',' << cell(v.eps) << ',' << verdict_name(v.verdict) << ','
      << cell(v.fitted_constant) << ',' << (v.open_case ? 1 : 0) << '\n';
}

void write_ratio_trace_csv(const std::string& family, const ConditionVerdict& v, std::ostream& out, bool header) {
  if (header) out << "family,condition,L,log10_x,log_ratio,ratio\n";
  for (std::size_t i = 0; i < v.L_grid.size(); ++i) {
    out << text(family) << ',' << condition_name(v.condition) << ',' << cell(v.L_grid[i]) << ','
        << cell(-v.L_grid[i] / std::log(10.0)) << ',' << cell(v.log_ratios[i]) << ',' << cell(std::exp(v.log_ratios[i]))
        << '\n';
  }
}

void write_hit_row_csv(const std::string& label, const HitProbReport& r, std::ostream& out, bool header) {
  if (header) out << "label,tol,p_hat,ci_low,ci_high,hits,n_paths,guard\n";
  out << text(label) << ',' << cell(r.tol) << ',' << cell(r.p_hat) << ',' << cell(r.ci_low) << ',' << cell(r.ci_high) << ','
      << r.hits << ',' << r.n_paths << ',' << cell(r.guard) << '\n';
}

void write_small_ball_csv(const SmallBallSweep& s, std::ostream& out) {
  out << "r,p_hat,ci_low,ci_high,hits,n_paths,window_lo,window_hi,r_pow_d,f_term\n";
  for (const auto& p : s.points) {
    out << cell(p.r) << ',' << cell(p.p_hat) << ',' << cell(p.ci_low) << ',' << cell(p.ci_high) << ',' << p.hits << ','
        << p.n_paths << ',' << cell(p.window_lo) << ',' << cell(p.window_hi) << ',' << cell(p.r_pow_d) << ','
        << cell(p.f_term) << '\n';
  }
}

void write_sandwich_csv(const SandwichReport& s, std::ostream& out) {
  out << "label,p_hat,ci_low,ci_high,capacity_term,content_term,dim_rho,critical,lower_ok,upper_ok\n";
  for (const auto& r : s.rows) {
    out << text(r.label) << ',' << cell(r.hit.p_hat) << ',' << cell(r.hit.ci_low) << ',' << cell(r.hit.ci_high) << ','
        << cell(r.hit.capacity_term) << ',' << cell(r.hit.content_term) << ',' << cell(r.dim_rho) << ','
        << (r.critical ? 1 : 0) << ',' << (r.lower_ok ? 1 : 0) << ',' << (r.upper_ok ? 1 : 0) << '\n';
  }
}

}  // namespace gpfractal
