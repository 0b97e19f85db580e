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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "fairscan/effectiveness.hpp"
#include "gtest/gtest.h"

using namespace fairscan::effectiveness;

namespace {

std::vector<int> padded(std::vector<int> v, std::size_t n = 10) {
  v.resize(n, 0);
  return v;
}

}  // namespace

TEST(RankHits, DirectLookup) {
  std::vector<std::string> r{"a", "b", "c"};
  EXPECT_EQ(rank_hits(r, {"b"}, 10).hits, (std::vector<int>{0, 1, 0}));
}

TEST(RankHits, DuplicatesDroppedBeforeTruncation) {
  std::vector<std::string> r{"a", "a", "b"};
  auto h = rank_hits(r, {"a"}, 10);
  EXPECT_EQ(h.hits, (std::vector<int>{1, 0}));
  EXPECT_EQ(h.dropped_duplicates, 1u);

  std::vector<std::string> r2{"x", "x", "x", "y"};
  EXPECT_EQ(rank_hits(r2, {"y"}, 2).hits, (std::vector<int>{0, 1}));
}

TEST(RankHits, PlaceholdersOccupyRanks) {
  std::vector<std::string> r{"", "", "a"};
  auto h = rank_hits(r, {"a"}, 10);
  EXPECT_EQ(h.hits, (std::vector<int>{0, 0, 1}));
  EXPECT_EQ(h.dropped_duplicates, 0u);
}

TEST(PerUser, PerfectSingleRelevant) {
  auto e = per_user_effectiveness(padded({1}), 1, 10);
  EXPECT_EQ(e.hr, 1.0);
  EXPECT_EQ(e.mrr, 1.0);
  EXPECT_DOUBLE_EQ(e.precision, 0.1);
  EXPECT_DOUBLE_EQ(e.ndcg, 1.0);
}

TEST(PerUser, ThirdRankTwoRelevant) {
  auto e = per_user_effectiveness(padded({0, 0, 1}), 2, 10);
  EXPECT_EQ(e.hr, 1.0);
  EXPECT_DOUBLE_EQ(e.mrr, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(e.precision, 0.1);
  EXPECT_NEAR(e.ndcg, 0.3066, 1e-4);
  EXPECT_DOUBLE_EQ(e.ndcg, 0.5 / (1.0 + 1.0 / std::log2(3.0)));
}

TEST(PerUser, NoHits) {
  auto e = per_user_effectiveness(padded({}), 3, 10);
  EXPECT_EQ(e.hr, 0.0);
  EXPECT_EQ(e.mrr, 0.0);
  EXPECT_EQ(e.precision, 0.0);
  EXPECT_EQ(e.ndcg, 0.0);
}

TEST(PerUser, ShortListsAndIdcgCap) {
  // Precision divides by k even when fewer than k items were returned.
  auto e = per_user_effectiveness(std::vector<int>{1}, 20, 10);
  EXPECT_DOUBLE_EQ(e.precision, 0.1);
  double idcg = 0.0;
  for (int i = 1; i <= 10; ++i) idcg += 1.0 / std::log2(i + 1.0);
  EXPECT_DOUBLE_EQ(e.ndcg, 1.0 / idcg);
  EXPECT_DOUBLE_EQ(per_user_effectiveness(std::vector<int>(10, 1), 20, 10).ndcg, 1.0);
  EXPECT_TRUE(per_user_effectiveness(std::vector<int>{}, 1, 10).ndcg == 0.0);
}

TEST(PerUser, MrrModes) {
  auto hits = padded({}, 15);
  hits[12] = 1;
  EXPECT_EQ(per_user_effectiveness(hits, 1, 10).mrr, 0.0);
  EXPECT_DOUBLE_EQ(per_user_effectiveness(hits, 1, 10, MrrMode::full_list).mrr, 1.0 / 13.0);
  EXPECT_EQ(per_user_effectiveness(hits, 1, 10, MrrMode::full_list).hr, 0.0);
}

TEST(PerUser, Preconditions) {
  EXPECT_THROW(per_user_effectiveness(std::vector<int>{1}, 0, 10), fairscan::ValidationError);
  EXPECT_THROW(per_user_effectiveness(std::vector<int>{1}, 1, 0), fairscan::ValidationError);
  EXPECT_THROW(per_user_effectiveness(std::vector<int>{1, 1}, 1, 10), fairscan::ValidationError);
}

TEST(PerUser, BoundsHold) {
  std::mt19937 rng(1);
  for (int t = 0; t < 500; ++t) {
    std::vector<int> h(rng() % 15);
    std::size_t ones = 0;
    for (auto& x : h) ones += x = static_cast<int>(rng() % 2);
    auto e = per_user_effectiveness(h, ones + rng() % 4 + 1, 10, t % 2 ? MrrMode::full_list : MrrMode::at_cutoff);
    for (double v : {e.hr, e.mrr, e.precision, e.ndcg}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0 + 1e-12);
    }
  }
}

TEST(EvaluateRun, MissingUsersScoreZeroAndUnjudgedCounted) {
  Judgments q{{"u1", {"a"}}, {"u2", {"b"}}};
  RankedRun r{{"u1", {"a", "a", "c"}}, {"u9", {"a"}}};
  auto ev = evaluate_run(r, q, {});
  ASSERT_EQ(ev.users.size(), 2u);
  EXPECT_EQ(ev.users[0].ndcg, 1.0);
  EXPECT_EQ(ev.users[1].ndcg, 0.0);
  EXPECT_EQ(ev.unjudged_users, 1u);
  EXPECT_EQ(ev.dropped_duplicates, 1u);
  EXPECT_DOUBLE_EQ(ev.mean().ndcg, 0.5);
  EXPECT_DOUBLE_EQ(ev.mean().precision, 0.05);
}

TEST(EvaluateRun, FullListMrrSeesBeyondCutoff) {
  Judgments q{{"u", {"z"}}};
  RankedRun r{{"u", {"a", "b", "c", "z"}}};
  EvalConfig cfg;
  cfg.k = 2;
  EXPECT_EQ(evaluate_run(r, q, cfg).users[0].mrr, 0.0);
  cfg.mrr = MrrMode::full_list;
  EXPECT_DOUBLE_EQ(evaluate_run(r, q, cfg).users[0].mrr, 0.25);
}

TEST(RunFiles, RoundTripAndValidation) {
  auto dir = std::filesystem::temp_directory_path() / "fairscan_eff_test";
  std::filesystem::create_directories(dir);
  RankedRun run{{"u1", {"a", "b"}}, {"u2", {"c"}}};
  write_run((dir / "run.tsv").string(), run);
  EXPECT_EQ(read_run((dir / "run.tsv").string()), run);

  {
    std::ofstream f(dir / "gap.tsv");
    f << "u1\ta\t1\t1\nu1\tb\t3\t0.5\n";
  }
  EXPECT_THROW(read_run((dir / "gap.tsv").string()), fairscan::ValidationError);
  {
    std::ofstream f(dir / "shuffled.tsv");
    f << "u1\tb\t2\t1\nu1\ta\t1\t0.5\n";
  }
  EXPECT_EQ(read_run((dir / "shuffled.tsv").string()).at("u1"), (std::vector<std::string>{"a", "b"}));
  {
    std::ofstream f(dir / "qrels.tsv");
    f << "u1\ta\n\nu1\tb\nu2\tc\n";
  }
  auto q = read_judgments((dir / "qrels.tsv").string());
  EXPECT_EQ(q.at("u1").size(), 2u);
  EXPECT_EQ(q.size(), 2u);
}
