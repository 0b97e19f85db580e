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
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "fairscan/common.hpp"

namespace fairscan::effectiveness {

// Binary relevance: user -> relevant item ids.
using Judgments = std::map<std::string, std::set<std::string>>;

// Ranked item ids per user. An empty id is a placeholder that never matches.
using RankedRun = std::map<std::string, std::vector<std::string>>;

enum class MrrMode { at_cutoff, full_list };
enum class BaseScore { precision, ndcg };

struct EvalConfig {
  int k = 10;
  MrrMode mrr = MrrMode::at_cutoff;

  void validate() const {
    if (k < 1) throw ValidationError("cutoff k must be >= 1");
  }
};

struct UserEffectiveness {
  std::string user_id;
  double hr = 0.0;
  double mrr = 0.0;
  double precision = 0.0;
  double ndcg = 0.0;

  double base(BaseScore b) const { return b == BaseScore::ndcg ? ndcg : precision; }
};

struct HitList {
  std::vector<int> hits;
  std::size_t dropped_duplicates = 0;
};

/// Binary relevance of the first `k` distinct items. Repeated ids after their
/// first occurrence are removed before truncation and counted.
inline HitList rank_hits(std::span<const std::string> ranked, const std::set<std::string>& relevant, std::size_t k) {
  HitList out;
  std::unordered_set<std::string> seen;
  for (const auto& item : ranked) {
    if (!item.empty() && !seen.insert(item).second) {
      ++out.dropped_duplicates;
      continue;
    }
    if (out.hits.size() < k) out.hits.push_back(!item.empty() && relevant.count(item) ? 1 : 0);
  }
  return out;
}

inline double discount(std::size_t rank) { return 1.0 / std::log2(static_cast<double>(rank) + 1.0); }

/// HR, MRR, P@k and NDCG@k for one user. Only the first `k` entries of `hits`
/// count, except for MRR in full-list mode.
inline UserEffectiveness per_user_effectiveness(std::span<const int> hits, std::size_t n_relevant, int k,
                                                MrrMode mrr_mode = MrrMode::at_cutoff) {
  if (n_relevant == 0) throw ValidationError("user has no judgments");
  if (k < 1) throw ValidationError("cutoff k must be >= 1");
  const auto cutoff = std::min(hits.size(), static_cast<std::size_t>(k));

  UserEffectiveness e;
  std::size_t n_hits = 0;
  double dcg = 0.0;
  for (std::size_t i = 0; i < cutoff; ++i) {
    if (!hits[i]) continue;
    if (n_hits == 0) e.mrr = 1.0 / static_cast<double>(i + 1);
    ++n_hits;
    dcg += discount(i + 1);
  }
  if (n_hits == 0 && mrr_mode == MrrMode::full_list) {
    for (std::size_t i = cutoff; i < hits.size(); ++i)
      if (hits[i]) {
        e.mrr = 1.0 / static_cast<double>(i + 1);
        break;
      }
  }
  if (n_hits > n_relevant) throw ValidationError("more hits than relevant items");
  double idcg = 0.0;
  for (std::size_t i = 1; i <= std::min(n_relevant, static_cast<std::size_t>(k)); ++i) idcg += discount(i);

  e.hr = n_hits > 0 ? 1.0 : 0.0;
  e.precision = static_cast<double>(n_hits) / k;
  e.ndcg = dcg / idcg;
  return e;
}

struct RunEvaluation {
  std::vector<UserEffectiveness> users;  // ordered by user id
  std::size_t dropped_duplicates = 0;
  std::size_t unjudged_users = 0;  // in the run but not in the judgments

  UserEffectiveness mean() const {
    UserEffectiveness m{"mean"};
    if (users.empty()) return m;
    for (const auto& u : users) {
      m.hr += u.hr;
      m.mrr += u.mrr;
      m.precision += u.precision;
      m.ndcg += u.ndcg;
    }
    const auto n = static_cast<double>(users.size());
    m.hr /= n;
    m.mrr /= n;
    m.precision /= n;
    m.ndcg /= n;
    return m;
  }
};

/// Scores every judged user; users absent from the run get an empty list.
inline RunEvaluation evaluate_run(const RankedRun& run, const Judgments& qrels, const EvalConfig& cfg) {
  cfg.validate();
  RunEvaluation out;
  static const std::vector<std::string> kEmpty;
  for (const auto& [user, relevant] : qrels) {
    if (relevant.empty()) continue;
    auto it = run.find(user);
    const auto& ranked = it == run.end() ? kEmpty : it->second;
    const auto limit = cfg.mrr == MrrMode::full_list ? ranked.size() : static_cast<std::size_t>(cfg.k);
    auto hl = rank_hits(ranked, relevant, limit);
    out.dropped_duplicates += hl.dropped_duplicates;
    auto e = per_user_effectiveness(hl.hits, relevant.size(), cfg.k, cfg.mrr);
    e.user_id = user;
    out.users.push_back(std::move(e));
  }
  for (const auto& [user, _] : run)
    if (!qrels.count(user)) ++out.unjudged_users;
  return out;
}

// `user<TAB>item`, no header.
inline Judgments read_judgments(const std::string& path) {
  Judgments q;
  io::for_each_record(path, '\t', [&](const auto& f, std::size_t line) {
    io::expect_fields(f, 2, path, line);
    if (f[0].empty() || f[1].empty()) throw ValidationError(io::where(path, line) + ": empty user or item id");
    q[std::string(f[0])].insert(std::string(f[1]));
  });
  return q;
}

// `user<TAB>item<TAB>rank<TAB>score`, ranks 1-based and contiguous per user.
inline RankedRun read_run(const std::string& path) {
  std::map<std::string, std::map<std::int64_t, std::string>> by_rank;
  std::map<std::string, std::size_t> first_line;
  io::for_each_record(path, '\t', [&](const auto& f, std::size_t line) {
    io::expect_fields(f, 4, path, line);
    if (f[0].empty()) throw ValidationError(io::where(path, line) + ": empty user id");
    auto rank = io::parse_int(f[2], path, line);
    io::parse_double(f[3], path, line);
    auto& ranks = by_rank[std::string(f[0])];
    first_line.emplace(std::string(f[0]), line);
    if (!ranks.emplace(rank, std::string(f[1])).second)
      throw ValidationError(io::where(path, line) + ": duplicate rank " + std::to_string(rank));
  });
  RankedRun run;
  for (auto& [user, ranks] : by_rank) {
    std::int64_t expected = 1;
    auto& list = run[user];
    for (auto& [rank, item] : ranks) {
      if (rank != expected)
        throw ValidationError(io::where(path, first_line[user]) + ": ranks of user " + user +
                              " are not contiguous from 1");
      ++expected;
      list.push_back(std::move(item));
    }
  }
  return run;
}

inline void write_run(const std::string& path, const RankedRun& run,
                      const std::map<std::string, std::vector<double>>* scores = nullptr) {
  auto out = io::open_out(path);
  for (const auto& [user, items] : run)
    for (std::size_t i = 0; i < items.size(); ++i) {
      double s = scores ? scores->at(user).at(i) : static_cast<double>(items.size() - i);
      out << user << '\t' << items[i] << '\t' << (i + 1) << '\t' << io::exact(s) << '\n';
    }
}

// Per-user table plus a trailing `mean` row.
inline void write_effectiveness(const std::string& path, const RunEvaluation& ev) {
  auto out = io::open_out(path);
  auto row = [&](const UserEffectiveness& e) {
    out << e.user_id << '\t' << io::fixed(e.hr) << '\t' << io::fixed(e.mrr) << '\t' << io::fixed(e.precision)
        << '\t' << io::fixed(e.ndcg) << '\n';
  };
  for (const auto& u : ev.users) row(u);
  row(ev.mean());
}

}  // namespace fairscan::effectiveness
