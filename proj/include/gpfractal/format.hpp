#pragma once

#include <charconv>
#include <string>

namespace gpfractal {

/// Shortest round-trip decimal form of v; locale independent.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace gpfractal
