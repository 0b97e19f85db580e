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

// Interaction-log preprocessing: k-core filtering, global temporal split and
// train-based pruning of the validation and test splits.

#pragma once

#include <algorithm>
#include <array>
#include <deque>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "fairscan/common.hpp"

namespace fairscan::prep {

struct Interaction {
  std::string user_id;
  std::string item_id;
  double weight = 1.0;
  std::int64_t timestamp = 0;

  friend bool operator==(const Interaction&, const Interaction&) = default;
};

inline bool chronological(const Interaction& a, const Interaction& b) {
  return std::tie(a.timestamp, a.user_id, a.item_id) < std::tie(b.timestamp, b.user_id, b.item_id);
}

struct SplitRatio {
  int train = 3;
  int val = 1;
  int test = 1;

  void validate() const {
    if (train <= 0 || val <= 0 || test <= 0) throw ValidationError("split ratio components must be positive");
  }
};

struct PrepConfig {
  int core_level = 5;
  SplitRatio ratio;
  int min_train_interactions = 5;

  void validate() const {
    if (core_level < 1) throw ValidationError("core level must be >= 1");
    ratio.validate();
    if (min_train_interactions < 0) throw ValidationError("train threshold must be >= 0");
  }
};

struct SplitDataset {
  std::vector<Interaction> train, val, test;
};

/// Largest subset in which every user and every item has at least `c`
/// interactions. Interactions are counted with multiplicity, so repeated
/// (user, item) rows each contribute a degree. The surviving rows keep their
/// input order.
inline std::vector<Interaction> kcore_filter(const std::vector<Interaction>& rows, int c) {
  if (c < 1) throw ValidationError("core level must be >= 1");
  std::unordered_map<std::string, std::vector<std::size_t>> by_user, by_item;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    by_user[rows[i].user_id].push_back(i);
    by_item[rows[i].item_id].push_back(i);
  }
  std::unordered_map<std::string, std::size_t> user_deg, item_deg;
  for (const auto& [u, idx] : by_user) user_deg[u] = idx.size();
  for (const auto& [it, idx] : by_item) item_deg[it] = idx.size();

  const auto need = static_cast<std::size_t>(c);
  std::vector<char> alive(rows.size(), 1);
  // (is_item, id) pairs awaiting removal.
  std::deque<std::pair<bool, std::string>> queue;
  std::unordered_set<std::string> dead_users, dead_items;
  for (const auto& [u, d] : user_deg)
    if (d < need) queue.emplace_back(false, u), dead_users.insert(u);
  for (const auto& [it, d] : item_deg)
    if (d < need) queue.emplace_back(true, it), dead_items.insert(it);

  while (!queue.empty()) {
    auto [is_item, id] = queue.front();
    queue.pop_front();
    const auto& incident = is_item ? by_item[id] : by_user[id];
    for (std::size_t i : incident) {
      if (!alive[i]) continue;
      alive[i] = 0;
      const auto& other = is_item ? rows[i].user_id : rows[i].item_id;
      auto& deg = is_item ? user_deg[other] : item_deg[other];
      auto& dead = is_item ? dead_users : dead_items;
      --deg;
      if (deg < need && dead.insert(other).second) queue.emplace_back(!is_item, other);
    }
  }

  std::vector<Interaction> out;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (alive[i]) out.push_back(rows[i]);
  return out;
}

/// Splits on a single global timeline. Rows are ordered by
/// (timestamp, user_id, item_id); the first floor(N*train/sum) go to train,
/// the next floor(N*val/sum) to validation and the remainder to test.
inline SplitDataset temporal_split(std::vector<Interaction> rows, const SplitRatio& ratio) {
  ratio.validate();
  std::stable_sort(rows.begin(), rows.end(), chronological);
  const auto n = rows.size();
  const auto sum = static_cast<std::size_t>(ratio.train + ratio.val + ratio.test);
  const auto n_train = n * static_cast<std::size_t>(ratio.train) / sum;
  const auto n_val = n * static_cast<std::size_t>(ratio.val) / sum;

  SplitDataset out;
  auto first = rows.begin();
  out.train.assign(first, first + static_cast<std::ptrdiff_t>(n_train));
  out.val.assign(first + static_cast<std::ptrdiff_t>(n_train), first + static_cast<std::ptrdiff_t>(n_train + n_val));
  out.test.assign(first + static_cast<std::ptrdiff_t>(n_train + n_val), rows.end());
  return out;
}

/// Drops users and items with at most `t` train interactions from every
/// split, then drops validation/test rows whose user or item no longer occurs
/// in train. Single pass: the second step does not trigger another round.
inline SplitDataset prune_by_train(const SplitDataset& split, int t) {
  if (t < 0) throw ValidationError("train threshold must be >= 0");
  std::unordered_map<std::string, int> user_count, item_count;
  for (const auto& r : split.train) {
    ++user_count[r.user_id];
    ++item_count[r.item_id];
  }
  auto keep = [&](const Interaction& r) {
    auto u = user_count.find(r.user_id);
    auto i = item_count.find(r.item_id);
    bool user_ok = u == user_count.end() || u->second > t;
    bool item_ok = i == item_count.end() || i->second > t;
    return user_ok && item_ok;
  };

  SplitDataset out;
  for (const auto& r : split.train)
    if (keep(r)) out.train.push_back(r);

  std::unordered_set<std::string> train_users, train_items;
  for (const auto& r : out.train) {
    train_users.insert(r.user_id);
    train_items.insert(r.item_id);
  }
  auto seen = [&](const Interaction& r) { return keep(r) && train_users.count(r.user_id) && train_items.count(r.item_id); };
  for (const auto& r : split.val)
    if (seen(r)) out.val.push_back(r);
  for (const auto& r : split.test)
    if (seen(r)) out.test.push_back(r);
  return out;
}

inline SplitDataset run_pipeline(const std::vector<Interaction>& rows, const PrepConfig& cfg) {
  cfg.validate();
  return prune_by_train(temporal_split(kcore_filter(rows, cfg.core_level), cfg.ratio), cfg.min_train_interactions);
}

struct DatasetStats {
  std::size_t interactions = 0;  // all splits
  std::size_t items = 0;         // distinct, all splits
  std::size_t users = 0;         // distinct, all splits
  std::size_t test_users = 0;
  std::array<std::size_t, 3> split_sizes{};
};

inline DatasetStats compute_stats(const SplitDataset& d) {
  DatasetStats s;
  std::set<std::string> users, items, test_users;
  for (const auto* part : {&d.train, &d.val, &d.test})
    for (const auto& r : *part) {
      users.insert(r.user_id);
      items.insert(r.item_id);
    }
  for (const auto& r : d.test) test_users.insert(r.user_id);
  s.split_sizes = {d.train.size(), d.val.size(), d.test.size()};
  s.interactions = d.train.size() + d.val.size() + d.test.size();
  s.items = items.size();
  s.users = users.size();
  s.test_users = test_users.size();
  return s;
}

inline nlohmann::ordered_json stats_json(const DatasetStats& s) {
  nlohmann::ordered_json j;
  j["interactions"] = s.interactions;
  j["items"] = s.items;
  j["users"] = s.users;
  j["test_users"] = s.test_users;
  j["train"] = s.split_sizes[0];
  j["val"] = s.split_sizes[1];
  j["test"] = s.split_sizes[2];
  return j;
}

// `user<TAB>item<TAB>weight<TAB>timestamp`, no header.
inline std::vector<Interaction> read_interactions(const std::string& path) {
  std::vector<Interaction> rows;
  io::for_each_record(path, '\t', [&](const auto& f, std::size_t line) {
    io::expect_fields(f, 4, path, line);
    Interaction r{std::string(f[0]), std::string(f[1]), io::parse_double(f[2], path, line),
                  io::parse_int(f[3], path, line)};
    if (r.user_id.empty() || r.item_id.empty())
      throw ValidationError(io::where(path, line) + ": empty user or item id");
    if (r.weight < 0.0) throw ValidationError(io::where(path, line) + ": negative weight");
    if (r.timestamp < 0) throw ValidationError(io::where(path, line) + ": negative timestamp");
    rows.push_back(std::move(r));
  });
  return rows;
}

inline void write_interactions(const std::string& path, const std::vector<Interaction>& rows) {
  auto out = io::open_out(path);
  for (const auto& r : rows)
    out << r.user_id << '\t' << r.item_id << '\t' << io::exact(r.weight) << '\t' << r.timestamp << '\n';
}

}  // namespace fairscan::prep
