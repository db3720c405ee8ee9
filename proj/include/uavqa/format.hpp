#pragma once

#include <charconv>
#include <string>

namespace uavqa {

/// Shortest decimal text that reads back to the same double.
inline std::string fmt_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace uavqa
