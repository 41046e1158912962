#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace qgheat {

/// Shortest decimal representation that round-trips to the same double.
inline std::string format_double(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, bool& ok) {
  double x = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  ok = (res.ec == std::errc{} && res.ptr == s.data() + s.size());
  return x;
}

}  // namespace qgheat
