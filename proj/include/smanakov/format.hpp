#ifndef SMANAKOV_FORMAT_HPP
#define SMANAKOV_FORMAT_HPP

#include <charconv>
#include <string>
#include <string_view>
#include <system_error>

#include "smanakov/errors.hpp"

namespace smanakov {

/// Locale-independent text for a double with 17 significant digits, so it round-trips.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

/// Shortest text that round-trips; for messages.
inline std::string format_short(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw ConfigError("cannot parse number '" + std::string(s) + "'");
  }
  return v;
}

} // namespace smanakov

#endif // SMANAKOV_FORMAT_HPP
