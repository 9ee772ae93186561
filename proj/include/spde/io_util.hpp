#pragma once

#include <charconv>
#include <string>

namespace spde {

inline constexpr const char* kVersionString = "spde 0.1.0";

/// Shortest round-trip decimal rendering, locale-independent by
/// construction ('.' separator always).
inline std::string formatDouble(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace spde
