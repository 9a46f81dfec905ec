#pragma once

// Internal CSV / number formatting helpers shared by the core sources.

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "chf/errors.hpp"

namespace chf::detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                        s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return fields;
}

inline double parse_double(std::string_view field, std::size_t line_no) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || field.empty()) {
    throw ValidationError("line " + std::to_string(line_no) +
                          ": cannot parse '" + std::string(field) +
                          "' as a number");
  }
  return value;
}

/// Shortest round-trip decimal representation; locale-independent and
/// deterministic, which the bytewise-reproducibility contract relies on.
inline std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

}  // namespace chf::detail
