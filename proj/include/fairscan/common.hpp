// Copyright 2026 The fairscan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fairscan {

// Bad input: malformed files, invalid configuration, violated preconditions.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Out-of-range measure parameter (epsilon, beta, ...).
class ParameterError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A measure is mathematically undefined on this input (e.g. infinite F).
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Orientation { higher_better, lower_better };
enum class SubjectKind { individual, group };

inline const char* to_string(Orientation o) {
  return o == Orientation::higher_better ? "higher_better" : "lower_better";
}

inline const char* to_string(SubjectKind k) {
  return k == SubjectKind::individual ? "individual" : "group";
}

// Nonnegative base scores, one per subject (a user or a group).
class ScoreVector {
 public:
  ScoreVector(std::vector<double> values, SubjectKind kind)
      : values_(std::move(values)), kind_(kind) {
    if (values_.empty()) throw ValidationError("score vector is empty");
    for (double v : values_) {
      if (!std::isfinite(v) || v < 0.0)
        throw ValidationError("score vector holds a negative or non-finite value");
    }
  }

  const std::vector<double>& values() const noexcept { return values_; }
  SubjectKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return values_.size(); }

  double mean() const noexcept {
    double s = 0.0;
    for (double v : values_) s += v;
    return s / static_cast<double>(values_.size());
  }

 private:
  std::vector<double> values_;
  SubjectKind kind_;
};

namespace io {

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline std::string where(const std::string& file, std::size_t line) {
  return file + ":" + std::to_string(line);
}

inline double parse_double(std::string_view s, const std::string& file, std::size_t line) {
  s = trim(s);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ValidationError(where(file, line) + ": expected a number, got '" + std::string(s) + "'");
  return v;
}

inline std::int64_t parse_int(std::string_view s, const std::string& file, std::size_t line) {
  s = trim(s);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ValidationError(where(file, line) + ": expected an integer, got '" + std::string(s) + "'");
  return v;
}

// Calls fn(fields, line_no) for every non-blank line of a delimited text file.
inline void for_each_record(const std::string& path, char sep,
                            const std::function<void(const std::vector<std::string_view>&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    fn(split(line, sep), line_no);
  }
}

inline void expect_fields(const std::vector<std::string_view>& f, std::size_t n, const std::string& file,
                          std::size_t line) {
  if (f.size() != n)
    throw ValidationError(where(file, line) + ": expected " + std::to_string(n) + " fields, got " +
                          std::to_string(f.size()));
}

// Shortest text that parses back to the same double.
inline std::string exact(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string fixed(double v, int digits = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  return out;
}

}  // namespace io
}  // namespace fairscan
