#pragma once

#include <cstdio>
#include <string>

namespace convxai {

// printf-style fixed-point rendering, e.g. format_fixed(0.953, 2) == "0.95".
inline std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

}  // namespace convxai
