#pragma once

#include <cstdio>
#include <string>

namespace beamalign {

// 17 significant digits: enough for an exact double round trip.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace beamalign
