#include "gpfractal/scale.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "gpfractal/errors.hpp"
#include "gpfractal/format.hpp"

namespace gpfractal {

namespace {

constexpr double kLog2 = std::numbers::ln2;

double parse_number(std::string_view field, std::string_view text) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ValidationError(std::string(field), "not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

}  // namespace

std::string_view family_name(Family f) {
  switch (f) {
    case Family::Power: return "power";
    case Family::PowerLog: return "powerlog";
    case Family::LogScale: return "logscale";
    case Family::ExpLog: return "explog";
    case Family::LogCorrected: return "logcorrected";
    case Family::PowerExpLog: return "powerexplog";
    case Family::PowerLogLog: return "powerloglog";
    case Family::Custom: return "custom";
  }
  return "unknown";
}

ScaleFunction::ScaleFunction(Family family, std::vector<double> params, double x_max)
    : family_(family), params_(std::move(params)), x_max_(x_max) {}

ScaleFunction ScaleFunction::power(double H, double x_max) {
  require(H > 0.0, "power: H must be positive");
  ScaleFunction f(Family::Power, {H}, x_max > 0.0 ? x_max : 1.0);
  f.finalize();
  return f;
}

ScaleFunction ScaleFunction::power_log(double H, double beta, double x_max) {
  require(H > 0.0, "powerlog: H must be positive");
  // Ψ = H - β/L must stay positive on the domain.
  const double def = beta > 0.0 ? 0.5 * std::exp(-beta / H) : 0.5;
  ScaleFunction f(Family::PowerLog, {H, beta}, x_max > 0.0 ? x_max : def);
  f.finalize();
  return f;
}

ScaleFunction ScaleFunction::log_scale(double beta, double x_max) {
  require(beta > 0.0, "logscale: beta must be positive");
  ScaleFunction f(Family::LogScale, {beta}, x_max > 0.0 ? x_max : 0.5);
  f.finalize();
  return f;
}

ScaleFunction ScaleFunction::exp_log(double alpha, double x_max) {
  require(alpha > 0.0 && alpha < 1.0, "explog: alpha must lie in (0,1)");
  ScaleFunction f(Family::ExpLog, {alpha}, x_max > 0.0 ? x_max : 0.5);
  f.finalize();
  return f;
}

ScaleFunction ScaleFunction::log_corrected(double beta, double alpha, double x_max) {
  require(beta > 0.0, "logcorrected: beta must be positive");
  // Needs log L >= 1 for the log log factor and log L > alpha/beta for monotonicity.
  const double L0 = std::max(std::numbers::e, std::exp(alpha / beta + 1.0));
  ScaleFunction f(Family::LogCorrected, {beta, alpha}, x_max > 0.0 ? x_max : std::exp(-L0));
  f.finalize();
  return f;
}

ScaleFunction ScaleFunction::power_exp_log(double H, double beta, double x_max) {
  require(H > 0.0, "powerexplog: H must be positive");
  require(beta > 0.0 && beta < 1.0, "powerexplog: beta must lie in (0,1)");
  const double L0 = std::max(kLog2, 2.0 * std::pow(beta / H, 1.0 / (1.0 - beta)));
  ScaleFunction f(Family::PowerExpLog, {H, beta}, x_max > 0.0 ? x_max : std::min(0.5, std::exp(-L0)));
  f.finalize();
  return f;
}

ScaleFunction ScaleFunction::power_log_log(double H, double x_max) {
  require(H > 0.0, "powerloglog: H must be positive");
  // Ψ = H - (u-1)/u² with u = log L; (u-1)/u² peaks at 1/4.
  double L0 = std::numbers::e;
  if (H <= 0.25) {
    const double u = (1.0 + std::sqrt(1.0 - 4.0 * H)) / (2.0 * H);
    L0 = std::max(L0, std::exp(u) + 1.0);
  }
  ScaleFunction f(Family::PowerLogLog, {H}, x_max > 0.0 ? x_max : 0.5 * std::exp(-L0));
  f.finalize();
  return f;
}

ScaleFunction ScaleFunction::custom(std::vector<double> r, std::vector<double> gamma) {
  if (r.size() != gamma.size() || r.size() < 3) throw ValidationError("custom", "need at least 3 (r, gamma) knots");
  ScaleFunction f(Family::Custom, {}, r.back());
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i] > 0.0) || !(gamma[i] > 0.0)) throw ValidationError("custom", "knots must be positive");
    if (i > 0 && (!(r[i] > r[i - 1]) || !(gamma[i] > gamma[i - 1]))) {
      throw ValidationError("custom", "knots must be strictly increasing in r and gamma");
    }
    f.knot_log_r_.push_back(std::log(r[i]));
    f.knot_log_g_.push_back(std::log(gamma[i]));
  }
  f.finalize();
  return f;
}

ScaleFunction ScaleFunction::custom_from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("custom.path", "cannot open '" + path + "'");
  std::vector<double> r, g;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto cols = split(t, ',');
    if (cols.size() != 2) throw ValidationError("custom.path", path + ":" + std::to_string(lineno) + ": expected 2 columns");
    if (r.empty() && g.empty() && !(std::isdigit(static_cast<unsigned char>(cols[0].front())) || cols[0].front() == '.')) {
      continue;  // header
    }
    r.push_back(parse_number("custom.r", cols[0]));
    g.push_back(parse_number("custom.gamma", cols[1]));
  }
  ScaleFunction f = custom(std::move(r), std::move(g));
  f.source_path_ = path;
  return f;
}

ScaleFunction ScaleFunction::parse(std::string_view spec) {
  spec = trim(spec);
  if (spec.empty()) throw ValidationError("gamma", "empty scale specification");
  const std::size_t colon = spec.find(':');
  const std::string_view name = trim(spec.substr(0, colon));
  std::map<std::string, std::string, std::less<>> kv;
  if (colon != std::string_view::npos) {
    for (auto item : split(spec.substr(colon + 1), ',')) {
      if (item.empty()) continue;
      const std::size_t eq = item.find('=');
      if (eq == std::string_view::npos) throw ValidationError("gamma", "expected key=value, got '" + std::string(item) + "'");
      kv.emplace(std::string(trim(item.substr(0, eq))), std::string(trim(item.substr(eq + 1))));
    }
  }
  auto take = [&](const char* key) -> double {
    auto it = kv.find(key);
    if (it == kv.end()) throw ValidationError("gamma", std::string(name) + ": missing parameter '" + key + "'");
    const double v = parse_number(std::string("gamma.") + key, it->second);
    kv.erase(it);
    return v;
  };
  auto take_or = [&](const char* key, double fallback) {
    return kv.count(key) ? take(key) : fallback;
  };
  auto finish = [&](ScaleFunction f) {
    if (!kv.empty()) throw ValidationError("gamma", std::string(name) + ": unknown parameter '" + kv.begin()->first + "'");
    return f;
  };

  try {
    if (name == "power") {
      const double H = take("H");
      return finish(power(H, take_or("x_max", 0.0)));
    }
    if (name == "powerlog") {
      const double H = take("H");
      const double beta = take("beta");
      return finish(power_log(H, beta, take_or("x_max", 0.0)));
    }
    if (name == "logscale") {
      const double beta = take("beta");
      return finish(log_scale(beta, take_or("x_max", 0.0)));
    }
    if (name == "explog") {
      const double alpha = take("alpha");
      return finish(exp_log(alpha, take_or("x_max", 0.0)));
    }
    if (name == "logcorrected") {
      const double beta = take("beta");
      const double alpha = take("alpha");
      return finish(log_corrected(beta, alpha, take_or("x_max", 0.0)));
    }
    if (name == "powerexplog") {
      const double H = take("H");
      const double beta = take("beta");
      return finish(power_exp_log(H, beta, take_or("x_max", 0.0)));
    }
    if (name == "powerloglog") {
      const double H = take("H");
      return finish(power_log_log(H, take_or("x_max", 0.0)));
    }
  } catch (const DomainError& e) {
    throw ValidationError("gamma", e.what());
  }
  if (name == "custom") {
    if (auto it = kv.find("path"); it != kv.end()) {
      const std::string path = it->second;
      kv.erase(it);
      return finish(custom_from_csv(path));
    }
    if (auto it = kv.find("knots"); it != kv.end()) {
      std::vector<double> r, g;
      for (auto pair : split(it->second, '|')) {
        const auto rg = split(pair, ':');
        if (rg.size() != 2) throw ValidationError("gamma.knots", "expected r:gamma pairs separated by '|'");
        r.push_back(parse_number("gamma.knots", rg[0]));
        g.push_back(parse_number("gamma.knots", rg[1]));
      }
      kv.erase(it);
      return finish(custom(std::move(r), std::move(g)));
    }
    throw ValidationError("gamma", "custom: need path=... or knots=...");
  }
  throw ValidationError("gamma", "unknown family '" + std::string(name) + "'");
}

std::string ScaleFunction::spec() const {
  std::string out(family_name(family_));
  out += ':';
  auto add = [&](const char* key, double v) {
    if (out.back() != ':') out += ',';
    out += key;
    out += '=';
    out += format_double(v);
  };
  switch (family_) {
    case Family::Power: add("H", params_[0]); break;
    case Family::PowerLog: add("H", params_[0]); add("beta", params_[1]); break;
    case Family::LogScale: add("beta", params_[0]); break;
    case Family::ExpLog: add("alpha", params_[0]); break;
    case Family::LogCorrected: add("beta", params_[0]); add("alpha", params_[1]); break;
    case Family::PowerExpLog: add("H", params_[0]); add("beta", params_[1]); break;
    case Family::PowerLogLog: add("H", params_[0]); break;
    case Family::Custom:
      if (!source_path_.empty()) {
        out += "path=" + source_path_;
      } else {
        out += "knots=";
        for (std::size_t i = 0; i < knot_log_r_.size(); ++i) {
          if (i) out += '|';
          out += format_double(std::exp(knot_log_r_[i])) + ":" + format_double(std::exp(knot_log_g_[i]));
        }
      }
      return out;
  }
  add("x_max", x_max_);
  return out;
}

void ScaleFunction::finalize() {
  if (!(x_max_ > 0.0) || !std::isfinite(x_max_)) throw DomainError("x_max must be positive");
  L_min_ = -std::log(x_max_);
  if (family_ != Family::Power && family_ != Family::Custom && !(L_min_ > 0.0)) {
    throw DomainError(std::string(family_name(family_)) + ": x_max must be below 1");
  }
  if (family_ == Family::LogCorrected && !(L_min_ > 1.0)) throw DomainError("logcorrected: x_max must be below 1/e");
  if (family_ == Family::PowerLogLog && !(L_min_ > 1.0)) throw DomainError("powerloglog: x_max must be below 1/e");

  // Sweep L = L_min + (e^u - 1) for monotonicity and concavity.
  constexpr int kSteps = 4000;
  const double u_max = std::log(1e5);
  std::vector<double> Ls(kSteps + 1);
  for (int i = 0; i <= kSteps; ++i) Ls[i] = L_min_ + std::expm1(u_max * i / kSteps);

  int last_bad = -1;
  int last_bad_var = -1;
  for (int i = 0; i <= kSteps; ++i) {
    const double L = Ls[i];
    const double psi = psi_at(L);
    if (!(psi > 0.0)) {
      throw DomainError(std::string(family_name(family_)) + ": not increasing on (0, x_max]; reduce x_max");
    }
    // γ' decreasing in r  <=>  1 - Ψ + (dΨ/dL)/Ψ >= 0.
    const double h = 1e-5 * std::max(1.0, L);
    const double lo = std::max(L_min_, L - h);
    const double dpsi = (psi_at(L + h) - psi_at(lo)) / (L + h - lo);
    const double margin = 1.0 - psi + dpsi / psi;
    if (margin < -1e-9) last_bad = i;
    // Same test for γ², whose elasticity is 2Ψ.
    if (margin - psi < -1e-9) last_bad_var = i;
  }
  auto limit = [&](int bad) {
    if (bad < 0) return x_max_;
    if (bad == kSteps) return 0.0;
    return std::exp(-Ls[bad + 1]);
  };
  x_conc_ = limit(last_bad);
  x_var_conc_ = limit(last_bad_var);
}

double ScaleFunction::custom_log_value(double L) const {
  const double lr = -L;
  const auto& xs = knot_log_r_;
  const auto& ys = knot_log_g_;
  std::size_t i;
  if (lr <= xs.front()) {
    i = 0;
  } else if (lr >= xs.back()) {
    i = xs.size() - 2;
  } else {
    i = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), lr) - xs.begin()) - 1;
  }
  const double slope = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
  return ys[i] + slope * (lr - xs[i]);
}

double ScaleFunction::log_value_at(double L) const {
  const double* p = params_.data();
  switch (family_) {
    case Family::Power: return -p[0] * L;
    case Family::PowerLog: return -p[0] * L + p[1] * std::log(L);
    case Family::LogScale: return -p[0] * std::log(L);
    case Family::ExpLog: return -std::pow(L, p[0]);
    case Family::LogCorrected: return -p[0] * std::log(L) + p[1] * std::log(std::log(L));
    case Family::PowerExpLog: return -p[0] * L + std::pow(L, p[1]);
    case Family::PowerLogLog: return -p[0] * L + L / std::log(L);
    case Family::Custom: return custom_log_value(L);
  }
  return 0.0;
}

double ScaleFunction::psi_at(double L) const {
  const double* p = params_.data();
  switch (family_) {
    case Family::Power: return p[0];
    case Family::PowerLog: return p[0] - p[1] / L;
    case Family::LogScale: return p[0] / L;
    case Family::ExpLog: return p[0] * std::pow(L, p[0] - 1.0);
    case Family::LogCorrected: return p[0] / L - p[1] / (L * std::log(L));
    case Family::PowerExpLog: return p[0] - p[1] * std::pow(L, p[1] - 1.0);
    case Family::PowerLogLog: {
      const double u = std::log(L);
      return p[0] - (u - 1.0) / (u * u);
    }
    case Family::Custom: {
      // Central difference with relative step 1e-6 in r, i.e. 1e-6 in log r.
      constexpr double h = 1e-6;
      return (custom_log_value(L - h) - custom_log_value(L + h)) / (2.0 * h);
    }
  }
  return 0.0;
}

double ScaleFunction::log_increment(double L, double z) const {
  const double* p = params_.data();
  switch (family_) {
    case Family::Power: return -p[0] * z;
    case Family::PowerLog: return -p[0] * z + p[1] * std::log1p(z / L);
    case Family::LogScale: return -p[0] * std::log1p(z / L);
    case Family::ExpLog: return -std::pow(L, p[0]) * std::expm1(p[0] * std::log1p(z / L));
    case Family::LogCorrected: {
      const double g = std::log1p(z / L);
      return -p[0] * g + p[1] * std::log1p(g / std::log(L));
    }
    case Family::PowerExpLog: return -p[0] * z + std::pow(L, p[1]) * std::expm1(p[1] * std::log1p(z / L));
    case Family::PowerLogLog: {
      const double a = std::log(L + z);
      const double b = std::log(L);
      return -p[0] * z + z / a - L * std::log1p(z / L) / (a * b);
    }
    case Family::Custom: return custom_log_value(L + z) - custom_log_value(L);
  }
  return 0.0;
}

double ScaleFunction::eval(double r) const {
  if (!(r >= 0.0) || r > x_max_ * (1.0 + 1e-12)) {
    throw DomainError("gamma: r = " + format_double(r) + " outside [0, " + format_double(x_max_) + "]");
  }
  if (r == 0.0) return 0.0;
  return std::exp(log_value_at(std::max(L_min_, -std::log(r))));
}

double ScaleFunction::psi(double r) const {
  if (!(r > 0.0) || r > x_max_ * (1.0 + 1e-12)) {
    throw DomainError("psi: r = " + format_double(r) + " outside (0, " + format_double(x_max_) + "]");
  }
  return psi_at(std::max(L_min_, -std::log(r)));
}

double ScaleFunction::derivative(double r) const {
  if (r == 0.0) throw DomainError("derivative: undefined at r = 0");
  return eval(r) * psi(r) / r;
}

double ScaleFunction::variance_derivative(double r) const {
  if (r == 0.0) throw DomainError("variance_derivative: undefined at r = 0");
  const double g = eval(r);
  return 2.0 * g * g * psi(r) / r;
}

double ScaleFunction::log_inverse(double log_v) const {
  const double top = log_value_at(L_min_);
  if (log_v > top + 1e-12 * std::max(1.0, std::abs(top))) {
    throw DomainError("gamma_inverse: value above gamma(x_max)");
  }
  if (log_v >= top) return L_min_;
  switch (family_) {
    case Family::Power: return -log_v / params_[0];
    case Family::LogScale: return std::exp(-log_v / params_[0]);
    case Family::ExpLog: return std::pow(-log_v, 1.0 / params_[0]);
    default: break;
  }
  // log γ(e^-L) is strictly decreasing in L.
  double lo = L_min_;
  double hi = L_min_ + 1.0;
  while (log_value_at(hi) > log_v) {
    lo = hi;
    hi = L_min_ + 2.0 * (hi - L_min_);
    if (!std::isfinite(hi)) throw NumericalError("gamma_inverse: bracket overflow");
  }
  for (int iter = 0; iter < 300 && hi - lo > 4e-16 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (log_value_at(mid) > log_v) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double ScaleFunction::inverse(double v, double tol) const {
  if (!(tol > 0.0)) throw DomainError("gamma_inverse: tol must be positive");
  if (!(v >= 0.0)) throw DomainError("gamma_inverse: negative value");
  if (v == 0.0) return 0.0;
  const double r = std::exp(-log_inverse(std::log(v)));
  // Preimages below the normal double range are only representable through log_inverse.
  if (r < std::numeric_limits<double>::min() || r >= x_max_) return std::min(r, x_max_);
  if (std::abs(eval(r) - v) <= tol) return r;
  // Polish on the r scale.
  double lo = 0.0, hi = x_max_;
  for (int iter = 0; iter < 400; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double g = eval(mid);
    if (std::abs(g - v) <= tol) return mid;
    if (g < v) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

IndexReport lower_index_report(const ScaleFunction& f, std::span<const double> r_grid) {
  if (r_grid.size() < 2) throw DomainError("lower_index_report: grid too small");
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    if (!(r_grid[i] > 0.0) || r_grid[i] > f.x_max()) throw DomainError("lower_index_report: grid outside (0, x_max]");
    if (i > 0 && !(r_grid[i] < r_grid[i - 1])) throw DomainError("lower_index_report: grid must be decreasing");
  }
  if (r_grid.front() / r_grid.back() < 1e4 * (1.0 - 1e-9)) throw DomainError("lower_index_report: grid must span >= 4 decades");

  IndexReport rep;
  rep.r.assign(r_grid.begin(), r_grid.end());
  for (double r : r_grid) rep.psi.push_back(f.psi(r));

  const double r_min = r_grid.back();
  std::size_t start = r_grid.size() - 1;
  while (start > 0 && r_grid[start - 1] <= 10.0 * r_min * (1.0 + 1e-12)) --start;
  if (start == r_grid.size() - 1) --start;

  rep.liminf_est = *std::min_element(rep.psi.begin() + start, rep.psi.end());
  rep.limsup_est = *std::max_element(rep.psi.begin() + start, rep.psi.end());
  // Secant slopes of log γ vs log r; by the mean value theorem each lies in the Ψ range.
  rep.ind_lower = std::numeric_limits<double>::infinity();
  rep.ind_upper = -std::numeric_limits<double>::infinity();
  for (std::size_t i = start; i + 1 < r_grid.size(); ++i) {
    const double L0 = -std::log(r_grid[i]);
    const double L1 = -std::log(r_grid[i + 1]);
    const double s = -f.log_increment(L0, L1 - L0) / (L1 - L0);
    rep.ind_lower = std::min(rep.ind_lower, s);
    rep.ind_upper = std::max(rep.ind_upper, s);
  }
  rep.psi_sqrtlog_limit_est = rep.psi.back() * std::sqrt(std::log(1.0 / r_min));
  return rep;
}

double phi_kernel(double beta, double r) {
  if (!(r > 0.0)) throw DomainError("phi_kernel: r must be positive");
  if (beta > 0.0) return std::pow(r, -beta);
  if (beta == 0.0) return 1.0 - std::log(std::min(r, 1.0));
  return 1.0;
}

}  // namespace gpfractal
