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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairscan/common.hpp"

namespace fairscan::agreement {

namespace detail {

// Number of tied pairs inside runs of equal values of a sorted sequence.
template <class Eq>
std::int64_t tied_pairs(std::size_t n, Eq&& equal) {
  std::int64_t total = 0, run = 1;
  for (std::size_t i = 1; i < n; ++i) {
    if (equal(i - 1, i)) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total + run * (run - 1) / 2;
}

// Sorts `v` ascending and returns the number of strict inversions.
inline std::int64_t merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const auto mid = lo + (hi - lo) / 2;
  std::int64_t swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace detail

/// Kendall tau-b in O(n log n) (Knight's algorithm). Returns nullopt when all
/// values of x or all values of y are tied.
inline std::optional<double> kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("kendall_tau_b: length mismatch");
  const auto n = x.size();
  if (n < 2) throw ValidationError("kendall_tau_b: need at least two observations");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]); });

  const auto n0 = static_cast<std::int64_t>(n * (n - 1) / 2);
  const auto tx = detail::tied_pairs(n, [&](auto i, auto j) { return x[order[i]] == x[order[j]]; });
  const auto txy = detail::tied_pairs(
      n, [&](auto i, auto j) { return x[order[i]] == x[order[j]] && y[order[i]] == y[order[j]]; });

  std::vector<double> ys(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  const auto discordant = detail::merge_count(ys, buf, 0, n);
  const auto ty = detail::tied_pairs(n, [&](auto i, auto j) { return ys[i] == ys[j]; });

  const auto denom_x = n0 - tx;
  const auto denom_y = n0 - ty;
  if (denom_x == 0 || denom_y == 0) return std::nullopt;
  const auto concordant_minus_discordant = n0 - tx - ty + txy - 2 * discordant;
  return static_cast<double>(concordant_minus_discordant) /
         std::sqrt(static_cast<double>(denom_x) * static_cast<double>(denom_y));
}

// One measure evaluated on every system. A missing value means the measure
// failed on that system.
struct MeasureSeries {
  std::string id;
  Orientation orientation = Orientation::lower_better;
  std::vector<std::optional<double>> values;
};

struct Cell {
  std::optional<double> tau;
  std::string cause;  // set when tau is undefined

  bool equivalent(double threshold) const { return tau && *tau >= threshold; }
};

struct AgreementMatrix {
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  std::vector<std::vector<Cell>> cells;
  double threshold = 0.9;
  std::vector<std::pair<std::string, std::string>> excluded;  // (measure, reason)
};

/// Values mapped so that smaller always means fairer.
inline std::vector<double> fairness_key(const MeasureSeries& s) {
  std::vector<double> out;
  for (const auto& v : s.values) out.push_back(s.orientation == Orientation::higher_better ? -*v : *v);
  return out;
}

inline bool all_tied(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

/// Kendall tau-b between every (row, column) measure pair, each measure first
/// mapped to a fairness-oriented key. Measures that failed on any system are
/// dropped and listed in `excluded`.
inline AgreementMatrix agreement_matrix(const std::vector<MeasureSeries>& rows, const std::vector<MeasureSeries>& cols,
                                        double threshold = 0.9) {
  AgreementMatrix m;
  m.threshold = threshold;
  std::size_t systems = 0;
  for (const auto* side : {&rows, &cols})
    for (const auto& s : *side) systems = std::max(systems, s.values.size());
  if (systems < 2) throw ValidationError("agreement needs at least two systems");

  auto usable = [&](const std::vector<MeasureSeries>& in, std::vector<std::string>& ids) {
    std::vector<std::vector<double>> keys;
    for (const auto& s : in) {
      if (s.values.size() != systems) throw ValidationError("measure " + s.id + " is not evaluated on every system");
      if (std::any_of(s.values.begin(), s.values.end(), [](const auto& v) { return !v.has_value(); })) {
        if (std::none_of(m.excluded.begin(), m.excluded.end(), [&](const auto& e) { return e.first == s.id; }))
          m.excluded.emplace_back(s.id, "failed on at least one system");
        continue;
      }
      ids.push_back(s.id);
      keys.push_back(fairness_key(s));
    }
    return keys;
  };
  const auto row_keys = usable(rows, m.rows);
  const auto col_keys = usable(cols, m.cols);

  for (const auto& rk : row_keys) {
    std::vector<Cell> line;
    for (const auto& ck : col_keys) {
      Cell c;
      c.tau = kendall_tau_b(rk, ck);
      if (!c.tau) c.cause = "all-tied";
      line.push_back(std::move(c));
    }
    m.cells.push_back(std::move(line));
  }
  return m;
}

}  // namespace fairscan::agreement
