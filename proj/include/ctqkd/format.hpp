#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

namespace ctqkd {

/// Six significant digits, the precision of every exported float.
inline std::string format_g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v + 0.0);
  return buf;
}

inline double round_g6(double v) { return std::strtod(format_g6(v).c_str(), nullptr); }

}  // namespace ctqkd
