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

// Deterministic synthetic cohorts for regression tests and demos.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "fairscan/common.hpp"
#include "fairscan/grouping.hpp"

namespace fairscan::fixtures {

namespace detail {

inline std::string padded(const char* prefix, std::size_t i, std::size_t width) {
  auto s = std::to_string(i);
  if (s.size() < width) s.insert(0, width - s.size(), '0');
  return prefix + s;
}

inline std::size_t digits(std::size_t n) { return std::to_string(n).size(); }

// mt19937_64 output is fully specified, unlike the std distributions.
inline double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <class T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

}  // namespace detail

/// Each group is a two-point distribution around its target mean: the lower
/// half of its users (rounded down) score mean*(1 - spread), the rest score
/// mean*(1 + spread*low/high), so the realized mean is exact.
struct SyntheticCohortSpec {
  std::vector<std::size_t> sizes{11, 901};
  std::vector<double> means{0.546, 0.471};
  double spread = 0.9;
  std::uint64_t seed = 42;
};

struct Cohort {
  std::map<std::string, double> scores;
  grouping::AttributeTable attributes;  // single attribute "group"
};

inline Cohort generate_masking_cohort(const SyntheticCohortSpec& spec) {
  if (spec.sizes.size() < 2 || spec.sizes.size() != spec.means.size())
    throw ValidationError("masking cohort needs at least two groups with one mean each");
  if (!(spec.spread >= 0.0 && spec.spread <= 1.0)) throw ValidationError("spread must be in [0,1]");

  std::size_t total = 0;
  for (auto n : spec.sizes) {
    if (n == 0) throw ValidationError("group sizes must be positive");
    total += n;
  }
  std::vector<std::string> user_ids;
  for (std::size_t i = 0; i < total; ++i) user_ids.push_back(detail::padded("u", i + 1, detail::digits(total)));
  std::mt19937_64 rng(spec.seed);
  detail::shuffle(user_ids, rng);

  Cohort c;
  std::size_t next = 0;
  for (std::size_t g = 0; g < spec.sizes.size(); ++g) {
    const double mu = spec.means[g];
    const auto n = spec.sizes[g];
    const auto high = (n + 1) / 2;
    const auto low = n - high;
    const double lo_value = mu * (1.0 - spec.spread);
    const double hi_value = mu + spec.spread * mu * static_cast<double>(low) / static_cast<double>(high);
    if (!(mu >= 0.0 && hi_value <= 1.0))
      throw ValidationError("infeasible spread for group mean " + io::exact(mu));
    const auto label = detail::padded("g", g + 1, detail::digits(spec.sizes.size()));
    for (std::size_t i = 0; i < n; ++i) {
      const auto& user = user_ids[next++];
      c.scores[user] = i < low ? lo_value : hi_value;
      c.attributes[user]["group"] = label;
    }
  }
  return c;
}

struct RefinementChain {
  std::map<std::string, double> scores;
  std::vector<grouping::GroupedScores> levels;  // coarsest first; each refines the previous
};

/// Level l (1-based) splits users into 2^(l-1) equal blocks of a seeded
/// permutation, so every level halves the groups of the one before.
inline RefinementChain generate_refinement_chain(int levels, std::uint64_t seed, std::size_t finest_group_size = 2) {
  if (levels < 2) throw ValidationError("refinement chain needs at least two levels");
  if (finest_group_size < 1) throw ValidationError("finest group size must be positive");
  const std::size_t n = finest_group_size << (levels - 1);
  std::mt19937_64 rng(seed);

  RefinementChain chain;
  std::vector<std::string> users;
  for (std::size_t i = 0; i < n; ++i) {
    users.push_back(detail::padded("u", i + 1, detail::digits(n)));
    chain.scores[users.back()] = detail::unit(rng);
  }
  detail::shuffle(users, rng);

  for (int level = 1; level <= levels; ++level) {
    const std::size_t groups = std::size_t{1} << (level - 1);
    const std::size_t block = n / groups;
    std::map<std::string, std::vector<grouping::Member>> parts;
    for (std::size_t p = 0; p < n; ++p)
      parts[detail::padded("g", p / block, detail::digits(groups))].push_back({users[p], chain.scores[users[p]]});
    chain.levels.emplace_back(std::move(parts));
  }
  return chain;
}

// `user_id<TAB>score`, the "scores" system form of the manifest.
inline void write_scores(const std::string& path, const std::map<std::string, double>& scores) {
  auto out = io::open_out(path);
  for (const auto& [u, s] : scores) out << u << '\t' << io::exact(s) << '\n';
}

inline void write_attributes(const std::string& path, const grouping::AttributeTable& attrs) {
  std::vector<std::string> names;
  for (const auto& [_, row] : attrs)
    for (const auto& [name, __] : row)
      if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
  auto out = io::open_out(path);
  out << "user_id";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (const auto& [user, row] : attrs) {
    out << user;
    for (const auto& n : names) {
      auto it = row.find(n);
      out << ',' << (it == row.end() ? "" : it->second);
    }
    out << '\n';
  }
}

}  // namespace fairscan::fixtures
