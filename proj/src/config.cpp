#include "gpfractal/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gpfractal/errors.hpp"
#include "gpfractal/format.hpp"

namespace gpfractal {

bool ConfigNode::has(const std::string& key) const { return node_->is_object() && node_->contains(key); }

std::string ConfigNode::child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

void ConfigNode::fail(const std::string& what) const { throw ValidationError(path_, what); }

void ConfigNode::fail(const std::string& key, const std::string& what) const { throw ValidationError(child(key), what); }

ConfigNode ConfigNode::at(const std::string& key) const {
  if (!node_->is_object()) fail("expected an object");
  const auto it = node_->find(key);
  if (it == node_->end()) fail(key, "missing required field");
  return {*it, child(key)};
}

ConfigNode ConfigNode::at(std::size_t index) const {
  if (!node_->is_array()) fail("expected an array");
  if (index >= node_->size()) fail("index " + std::to_string(index) + " out of range");
  return {(*node_)[index], path_ + "[" + std::to_string(index) + "]"};
}

std::size_t ConfigNode::size() const {
  if (!node_->is_array()) fail("expected an array");
  return node_->size();
}

double ConfigNode::number(const std::string& key) const {
  const ConfigNode n = at(key);
  if (!n.json().is_number()) n.fail("expected a number");
  const double v = n.json().get<double>();
  if (!std::isfinite(v)) n.fail("must be finite");
  return v;
}

double ConfigNode::number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

double ConfigNode::number_in(const std::string& key, double lo, double hi) const {
  const double v = number(key);
  if (!(v >= lo && v <= hi)) fail(key, "must lie in [" + format_double(lo) + ", " + format_double(hi) + "], got " + format_double(v));
  return v;
}

double ConfigNode::number_in(const std::string& key, double lo, double hi, double fallback) const {
  return has(key) ? number_in(key, lo, hi) : fallback;
}

std::uint64_t ConfigNode::unsigned_int(const std::string& key) const {
  const ConfigNode n = at(key);
  if (n.json().is_number_unsigned()) return n.json().get<std::uint64_t>();
  if (n.json().is_number_integer()) n.fail("must be nonnegative");
  n.fail("expected a nonnegative integer");
}

std::uint64_t ConfigNode::unsigned_int(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? unsigned_int(key) : fallback;
}

std::uint64_t ConfigNode::count_in(const std::string& key, std::uint64_t lo, std::uint64_t hi) const {
  const auto v = unsigned_int(key);
  if (v < lo || v > hi) fail(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " + std::to_string(v));
  return v;
}

std::uint64_t ConfigNode::count_in(const std::string& key, std::uint64_t lo, std::uint64_t hi, std::uint64_t fallback) const {
  return has(key) ? count_in(key, lo, hi) : fallback;
}

std::string ConfigNode::string(const std::string& key) const {
  const ConfigNode n = at(key);
  if (!n.json().is_string()) n.fail("expected a string");
  return n.json().get<std::string>();
}

std::string ConfigNode::string(const std::string& key, const std::string& fallback) const {
  return has(key) ? string(key) : fallback;
}

bool ConfigNode::boolean(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const ConfigNode n = at(key);
  if (!n.json().is_boolean()) n.fail("expected true or false");
  return n.json().get<bool>();
}

std::vector<double> ConfigNode::numbers(const std::string& key) const {
  const ConfigNode n = at(key);
  std::vector<double> out;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const ConfigNode e = n.at(i);
    if (!e.json().is_number()) e.fail("expected a number");
    out.push_back(e.json().get<double>());
    if (!std::isfinite(out.back())) e.fail("must be finite");
  }
  return out;
}

Json parse_config_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // nlohmann reports "line L, column C" inside what().
    throw ValidationError(source, std::string("malformed JSON: ") + e.what());
  }
}

Json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path, "cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

ScaleFunction parse_gamma(const ConfigNode& node, const std::string& key) {
  const std::string spec = node.string(key);
  try {
    return ScaleFunction::parse(spec);
  } catch (const std::invalid_argument& e) {
    node.fail(key, e.what());
  }
}

TimeSet parse_time_set(const ConfigNode& node, const ScaleFunction& f) {
  if (node.has("intervals") == node.has("cantor")) node.fail("expected exactly one of \"intervals\" or \"cantor\"");
  if (node.has("intervals")) {
    const ConfigNode list = node.at("intervals");
    if (list.size() == 0) list.fail("needs at least one interval");
    IntervalUnion E;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const ConfigNode iv = list.at(i);
      if (iv.size() != 2) iv.fail("expected [left, right]");
      const double l = iv.json()[0].is_number() ? iv.json()[0].get<double>() : NAN;
      const double r = iv.json()[1].is_number() ? iv.json()[1].get<double>() : NAN;
      if (!(l > 0.0 && r >= l && std::isfinite(r))) iv.fail("need 0 < left <= right");
      E.parts.push_back({l, r});
    }
    return E;
  }
  const ConfigNode c = node.at("cantor");
  const double zeta = c.number("zeta");
  if (!(zeta > 0.0)) c.fail("zeta", "must be positive");
  const int depth = static_cast<int>(c.count_in("depth", 0, CantorSet::kMaxDepth));
  const double eps0 = c.number("eps0", 1.0);
  if (!(eps0 > 0.0 && eps0 <= 1.0)) c.fail("eps0", "must lie in (0, 1]");
  const double origin = c.number("origin", 0.0);
  try {
    return build_cantor(f, zeta, depth, eps0, origin);
  } catch (const DomainError& e) {
    c.fail(e.what());
  }
}

SpatialSet parse_spatial_set(const ConfigNode& node, std::size_t d) {
  SpatialSet F(d);
  auto vec = [&](const ConfigNode& parent, const std::string& key) {
    auto v = parent.numbers(key);
    if (v.size() != d) parent.fail(key, "expected " + std::to_string(d) + " coordinates");
    return v;
  };
  if (node.has("boxes")) {
    const ConfigNode list = node.at("boxes");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const ConfigNode b = list.at(i);
      auto lo = vec(b, "lo");
      auto hi = vec(b, "hi");
      for (std::size_t c = 0; c < d; ++c) {
        if (hi[c] < lo[c]) b.fail("hi", "must be >= lo in every coordinate");
      }
      F.add_box({std::move(lo), std::move(hi)});
    }
  }
  if (node.has("balls")) {
    const ConfigNode list = node.at("balls");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const ConfigNode b = list.at(i);
      auto center = vec(b, "center");
      const double r = b.number("radius");
      if (!(r >= 0.0)) b.fail("radius", "must be >= 0");
      F.add_ball({std::move(center), r});
    }
  }
  if (F.empty()) node.fail("needs at least one box or ball");
  return F;
}

CovKind parse_cov_kind(const ConfigNode& node, const std::string& key) {
  const std::string k = node.string(key, "stationary");
  if (k == "stationary") return CovKind::StationaryIncrements;
  if (k == "volterra") return CovKind::Volterra;
  node.fail(key, "expected \"stationary\" or \"volterra\"");
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string config_hash(const Json& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(config.dump())));
  return buf;
}

}  // namespace gpfractal
