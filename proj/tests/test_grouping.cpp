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

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "fairscan/grouping.hpp"
#include "gtest/gtest.h"

using namespace fairscan::grouping;

namespace {

GroupingSpec movielens_like() {
  return parse_grouping_spec(nlohmann::json::parse(R"({"attributes": [
    {"name": "gender", "type": "passthrough"},
    {"name": "age", "type": "bins", "edges": [18, 25, 50], "labels": ["18-24", "25-49", "50+"]},
    {"name": "occupation", "type": "map",
     "mapping": {"student": "non-working", "homemaker": "non-working", "retired": "non-working",
                 "unemployed": "non-working"},
     "default": "working"}]})"));
}

std::vector<std::string> member_ids(const GroupedScores& g, const std::string& key) {
  std::vector<std::string> out;
  for (const auto& m : g.groups().at(key)) out.push_back(m.user_id);
  return out;
}

}  // namespace

TEST(BinAttribute, Rules) {
  auto spec = movielens_like();
  EXPECT_EQ(bin_attribute(spec.rule("age"), "25"), "25-49");
  EXPECT_EQ(bin_attribute(spec.rule("age"), "24.9"), "18-24");
  EXPECT_EQ(bin_attribute(spec.rule("age"), "90"), "50+");
  EXPECT_EQ(bin_attribute(spec.rule("occupation"), "retired"), "non-working");
  EXPECT_EQ(bin_attribute(spec.rule("occupation"), "lawyer"), "working");
  EXPECT_EQ(bin_attribute(spec.rule("gender"), "F"), "F");
}

TEST(BinAttribute, UnbinnableValues) {
  auto spec = movielens_like();
  EXPECT_THROW(bin_attribute(spec.rule("age"), "12"), fairscan::ValidationError);
  EXPECT_THROW(bin_attribute(spec.rule("age"), "old"), fairscan::ValidationError);
  AttributeRule closed{"x", NumericBins{{0, 1, 2}, {"a", "b"}}};
  EXPECT_EQ(bin_attribute(closed, "1.5"), "b");
  EXPECT_THROW(bin_attribute(closed, "2"), fairscan::ValidationError);
  AttributeRule strict{"y", CategoricalMap{{{"a", "A"}}, std::nullopt}};
  EXPECT_THROW(bin_attribute(strict, "b"), fairscan::ValidationError);
}

TEST(GroupingSpecJson, Rejections) {
  using nlohmann::json;
  EXPECT_THROW(parse_grouping_spec(json::parse(R"({"attributes": []})")), fairscan::ValidationError);
  EXPECT_THROW(parse_grouping_spec(json::parse(R"({"attributes": [{"name": "a", "type": "odd"}]})")),
               fairscan::ValidationError);
  EXPECT_THROW(parse_grouping_spec(json::parse(
                   R"({"attributes": [{"name": "a", "type": "bins", "edges": [2, 1], "labels": ["x", "y"]}]})")),
               fairscan::ValidationError);
  EXPECT_THROW(parse_grouping_spec(json::parse(
                   R"({"attributes": [{"name": "a", "type": "passthrough"}, {"name": "a", "type": "passthrough"}]})")),
               fairscan::ValidationError);
  EXPECT_THROW(movielens_like().rule("zip"), fairscan::ValidationError);
}

TEST(FormGroups, DirectPartition) {
  auto spec = movielens_like();
  AttributeTable attrs{{"u1", {{"gender", "F"}}}, {"u2", {{"gender", "M"}}}, {"u3", {{"gender", "F"}}}};
  auto f = form_groups(attrs, spec, {"gender"}, {{"u1", 0.1}, {"u2", 0.2}, {"u3", 0.3}});
  EXPECT_EQ(f.grouped.group_count(), 2u);
  EXPECT_EQ(member_ids(f.grouped, "F"), (std::vector<std::string>{"u1", "u3"}));
  EXPECT_EQ(member_ids(f.grouped, "M"), (std::vector<std::string>{"u2"}));
  EXPECT_EQ(f.missing_attribute_users, 0u);
}

TEST(FormGroups, TwelveIntersectionalGroups) {
  auto spec = movielens_like();
  AttributeTable attrs;
  std::map<std::string, double> scores;
  int id = 0;
  for (const char* g : {"F", "M"})
    for (const char* age : {"20", "30", "60"})
      for (const char* occ : {"student", "doctor"}) {
        auto u = "u" + std::to_string(id++);
        attrs[u] = {{"gender", g}, {"age", age}, {"occupation", occ}};
        scores[u] = 0.5;
      }
  auto f = form_groups(attrs, spec, {"occupation", "gender", "age"}, scores);
  EXPECT_EQ(f.grouped.group_count(), 12u);
  // Key follows spec order regardless of the chosen order.
  EXPECT_TRUE(f.grouped.groups().count("F|18-24|non-working"));
}

TEST(FormGroups, EmptyCombinationAbsentAndMissingCounted) {
  auto spec = movielens_like();
  AttributeTable attrs{{"u1", {{"gender", "F"}, {"age", "20"}}},
                       {"u2", {{"gender", "M"}, {"age", "60"}}},
                       {"u3", {{"gender", "M"}, {"age", "20"}}},
                       {"u4", {{"gender", "F"}}}};
  auto f = form_groups(attrs, spec, {"gender", "age"},
                       {{"u1", 0.1}, {"u2", 0.2}, {"u3", 0.3}, {"u4", 0.4}, {"u5", 0.5}});
  EXPECT_EQ(f.grouped.group_count(), 3u);
  EXPECT_FALSE(f.grouped.groups().count("F|50+"));
  EXPECT_EQ(f.missing_attribute_users, 2u);
  EXPECT_EQ(f.grouped.user_count(), 3u);
}

TEST(FormGroups, PartitionProperty) {
  auto spec = movielens_like();
  std::mt19937 rng(4);
  AttributeTable attrs;
  std::map<std::string, double> scores;
  const char* genders[] = {"F", "M"};
  for (int i = 0; i < 300; ++i) {
    auto u = "u" + std::to_string(i);
    attrs[u] = {{"gender", genders[rng() % 2]}, {"age", std::to_string(18 + rng() % 60)}, {"occupation", "x"}};
    scores[u] = (rng() % 1000) / 1000.0;
  }
  for (std::size_t a = 1; a <= 3; ++a)
    for (const auto& chosen : attribute_subsets(spec.names(), a)) {
      auto g = form_groups(attrs, spec, chosen, scores).grouped;
      EXPECT_EQ(g.user_count(), scores.size());
      std::set<std::string> seen;
      for (const auto& [_, members] : g.groups()) {
        EXPECT_FALSE(members.empty());
        for (const auto& m : members) EXPECT_TRUE(seen.insert(m.user_id).second);
      }
    }
}

TEST(GroupMeans, Examples) {
  GroupedScores g({{"a", {{"x", 0.5}, {"y", 0.6}}}, {"b", {{"z", 0.4}}}});
  auto v = group_mean_vector(g);
  ASSERT_EQ(v.values().size(), 2u);
  EXPECT_DOUBLE_EQ(v.values()[0], 0.55);
  EXPECT_DOUBLE_EQ(v.values()[1], 0.40);
  EXPECT_EQ(v.kind(), fairscan::SubjectKind::group);

  auto one = group_mean_vector(single_group({{"a", 0.2}, {"b", 0.4}}));
  ASSERT_EQ(one.values().size(), 1u);
  EXPECT_DOUBLE_EQ(one.values()[0], 0.3);
  EXPECT_EQ(singleton_groups({{"a", 0.2}, {"b", 0.4}}).group_count(), 2u);
  EXPECT_THROW(group_mean_vector(GroupedScores{}), fairscan::ValidationError);
}

TEST(GroupMeans, EmptyGroupsDropped) {
  GroupedScores g({{"a", {}}, {"b", {{"z", 0.4}}}});
  EXPECT_EQ(g.group_count(), 1u);
}

TEST(AttributeSubsets, Counts) {
  std::vector<std::string> names{"a", "b", "c"};
  EXPECT_EQ(attribute_subsets(names, 1).size(), 3u);
  EXPECT_EQ(attribute_subsets(names, 2), (std::vector<std::vector<std::string>>{{"a", "b"}, {"a", "c"}, {"b", "c"}}));
  EXPECT_EQ(attribute_subsets(names, 3).size(), 1u);
  EXPECT_TRUE(attribute_subsets(names, 4).empty());
  EXPECT_EQ(attribute_subsets({"a", "b", "c", "d", "e"}, 2).size(), 10u);
}

TEST(AttributeFile, ReadsBlankAsMissing) {
  auto dir = std::filesystem::temp_directory_path() / "fairscan_grouping_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "attrs.csv");
    f << "user_id,gender,age\nu1,F,20\nu2,,30\n";
  }
  auto t = read_attributes((dir / "attrs.csv").string());
  EXPECT_EQ(t.at("u1").at("gender"), "F");
  EXPECT_FALSE(t.at("u2").count("gender"));
  {
    std::ofstream f(dir / "dup.csv");
    f << "user_id,gender\nu1,F\nu1,M\n";
  }
  EXPECT_THROW(read_attributes((dir / "dup.csv").string()), fairscan::ValidationError);
}
