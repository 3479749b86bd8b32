#pragma once

#include <ostream>
#include <string>

#include "json.hpp"

#include "gpfractal/conditions.hpp"
#include "gpfractal/dimension.hpp"
#include "gpfractal/energy.hpp"
#include "gpfractal/fractal_sets.hpp"
#include "gpfractal/hitting.hpp"
#include "gpfractal/metrics.hpp"

namespace gpfractal {

using Json = nlohmann::ordered_json;

/// JSON number, or null for NaN and infinities.
Json json_number(double v);

Json to_json(const DimensionEstimate& e);
Json to_json(const ImageDimensionReport& r);
Json to_json(const IntersectionReport& r);
Json to_json(const CommensurabilityReport& r);
/// Parameters plus the intervals of `level` (default: the deepest).
Json to_json(const CantorSet& set, int level = -1);
Json to_json(const CapacityReport& r);
Json to_json(const ConditionVerdict& v);
/// Without the per-path distances.
Json to_json(const HitProbReport& r);
Json to_json(const SmallBallSweep& s);
Json to_json(const SandwichReport& s);
Json to_json(const TimeSet& E);
Json to_json(const SpatialSet& F);

/// scale,count,path; path -1 marks a set-level estimate.
void write_counts_csv(const DimensionEstimate& e, long path, std::ostream& out, bool header);
/// t,weight.
void write_atoms_csv(const DiscreteMeasure& m, std::ostream& out);
/// resolution,atoms,e_min,gap,iterations,capacity.
void write_capacity_csv(const CapacityReport& r, std::ostream& out);
/// resolution,iteration,energy,gap,away.
void write_capacity_trace_csv(const CapacityReport& r, std::ostream& out);
/// family,condition,eps,verdict,constant,open.
void write_verdict_row_csv(const std::string& family, const ConditionVerdict& v, std::ostream& out, bool header);
/// family,condition,L,log10_x,log_ratio,ratio.
void write_ratio_trace_csv(const std::string& family, const ConditionVerdict& v, std::ostream& out, bool header);
/// label,tol,p_hat,ci_low,ci_high,hits,n_paths,guard.
void write_hit_row_csv(const std::string& label, const HitProbReport& r, std::ostream& out, bool header);
/// r,p_hat,ci_low,ci_high,hits,n_paths,window_lo,window_hi,r_pow_d,f_term.
void write_small_ball_csv(const SmallBallSweep& s, std::ostream& out);
/// label,p_hat,ci_low,ci_high,capacity_term,content_term,dim_rho,critical,lower_ok,upper_ok.
void write_sandwich_csv(const SandwichReport& s, std::ostream& out);

}  // namespace gpfractal
