// Copyright 2026 The evplace Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Minimal CSV plumbing shared by the instance, forecast and solution formats.
// All formats are plain comma separated, no quoting, `.` decimal separator.

#ifndef EVPLACE_CSV_HPP_
#define EVPLACE_CSV_HPP_

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "evplace/error.hpp"

namespace evplace::csv {

struct Line {
  std::size_t number = 0;  // 1-based
  std::string text;
};

// Reads all non-empty lines, stripping a trailing CR so CRLF files parse the
// same as LF files.
inline std::vector<Line> read_lines(std::istream& in) {
  std::vector<Line> lines;
  std::string text;
  std::size_t number = 0;
  while (std::getline(in, text)) {
    ++number;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (number == 1 && text.size() >= 3 &&
        text.compare(0, 3, "\xEF\xBB\xBF") == 0) {
      text.erase(0, 3);  // UTF-8 BOM
    }
    if (text.empty()) continue;
    lines.push_back({number, std::move(text)});
  }
  return lines;
}

inline std::vector<std::string_view> split(std::string_view text,
                                           char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::int64_t parse_int(std::string_view field, std::size_t line,
                              std::string_view what) {
  field = trim(field);
  std::int64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() ||
      field.empty()) {
    throw ParseError(line, "invalid integer for " + std::string(what) + ": '" +
                               std::string(field) + "'");
  }
  return value;
}

inline double parse_double(std::string_view field, std::size_t line,
                           std::string_view what) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() ||
      field.empty()) {
    throw ParseError(line, "invalid number for " + std::string(what) + ": '" +
                               std::string(field) + "'");
  }
  if (!std::isfinite(value)) {
    throw ParseError(line, "non-finite value for " + std::string(what));
  }
  return value;
}

// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

}  // namespace evplace::csv

#endif  // EVPLACE_CSV_HPP_
