#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace warpstab {

// Shortest round-trip decimal form; deterministic across runs, so CSV bodies diff cleanly.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace warpstab
