#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gpfractal/dimension.hpp"
#include "gpfractal/report.hpp"
#include "gpfractal/scale.hpp"
#include "gpfractal/spatial.hpp"

namespace gpfractal {

/// Read-only view of a JSON config node that remembers its path ("instances[2].F") so every
/// ValidationError names the offending field.
class ConfigNode {
 public:
  ConfigNode(const Json& node, std::string path) : node_(&node), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }
  const Json& json() const noexcept { return *node_; }
  bool has(const std::string& key) const;

  ConfigNode at(const std::string& key) const;
  ConfigNode at(std::size_t index) const;
  std::size_t size() const;

  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  /// Number constrained to lo <= v <= hi.
  double number_in(const std::string& key, double lo, double hi) const;
  double number_in(const std::string& key, double lo, double hi, double fallback) const;
  std::uint64_t unsigned_int(const std::string& key) const;
  std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback) const;
  /// Unsigned integer constrained to lo <= v <= hi.
  std::uint64_t count_in(const std::string& key, std::uint64_t lo, std::uint64_t hi) const;
  std::uint64_t count_in(const std::string& key, std::uint64_t lo, std::uint64_t hi, std::uint64_t fallback) const;
  std::string string(const std::string& key) const;
  std::string string(const std::string& key, const std::string& fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::vector<double> numbers(const std::string& key) const;

  [[noreturn]] void fail(const std::string& what) const;
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

 private:
  std::string child(const std::string& key) const;

  const Json* node_;
  std::string path_;
};

/// Parses JSON text; ValidationError with line and column on malformed input.
Json parse_config_text(const std::string& text, const std::string& source);
Json load_config_file(const std::string& path);

/// Family spec string at node[key].
ScaleFunction parse_gamma(const ConfigNode& node, const std::string& key = "gamma");

/// {"intervals": [[a, b], ...]} or {"cantor": {"zeta", "depth", "eps0"?, "origin"?}} (built on f).
TimeSet parse_time_set(const ConfigNode& node, const ScaleFunction& f);
/// {"boxes": [{"lo": [...], "hi": [...]}], "balls": [{"center": [...], "radius": r}]} in R^d.
SpatialSet parse_spatial_set(const ConfigNode& node, std::size_t d);
CovKind parse_cov_kind(const ConfigNode& node, const std::string& key = "kind");

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
/// FNV-1a of the compact dump, as 16 lowercase hex digits.
std::string config_hash(const Json& config);

}  // namespace gpfractal
