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
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fairscan/common.hpp"

namespace fairscan::grouping {

// user -> attribute name -> raw value. Missing or blank values are absent.
using AttributeTable = std::map<std::string, std::map<std::string, std::string>>;

struct Passthrough {};

struct CategoricalMap {
  std::map<std::string, std::string> mapping;
  std::optional<std::string> fallback;  // label for values not in `mapping`
};

// Bin i covers [edges[i], edges[i+1]); the last bin is open-ended when
// labels.size() == edges.size().
struct NumericBins {
  std::vector<double> edges;
  std::vector<std::string> labels;
};

struct AttributeRule {
  std::string name;
  std::variant<Passthrough, CategoricalMap, NumericBins> kind;
};

struct GroupingSpec {
  std::vector<AttributeRule> rules;

  const AttributeRule& rule(const std::string& name) const {
    for (const auto& r : rules)
      if (r.name == name) return r;
    throw ValidationError("attribute '" + name + "' is not in the grouping spec");
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& r : rules) out.push_back(r.name);
    return out;
  }
};

inline std::string bin_attribute(const AttributeRule& rule, const std::string& raw) {
  return std::visit(
      [&](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Passthrough>) {
          return raw;
        } else if constexpr (std::is_same_v<K, CategoricalMap>) {
          auto it = k.mapping.find(raw);
          if (it != k.mapping.end()) return it->second;
          if (k.fallback) return *k.fallback;
          throw ValidationError("unbinnable value '" + raw + "' for attribute " + rule.name);
        } else {
          double v = 0.0;
          auto t = io::trim(raw);
          auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
          if (ec != std::errc() || ptr != t.data() + t.size())
            throw ValidationError("unbinnable value '" + raw + "' for attribute " + rule.name + ": not numeric");
          for (std::size_t i = 0; i < k.labels.size(); ++i) {
            bool above = v >= k.edges[i];
            bool below = i + 1 >= k.edges.size() || v < k.edges[i + 1];
            if (above && below) return k.labels[i];
          }
          throw ValidationError("unbinnable value '" + raw + "' for attribute " + rule.name);
        }
      },
      rule.kind);
}

struct Member {
  std::string user_id;
  double score = 0.0;
};

/// Scores partitioned by group key. Keys iterate in lexicographic order and
/// every group is nonempty.
class GroupedScores {
 public:
  GroupedScores() = default;

  explicit GroupedScores(std::map<std::string, std::vector<Member>> groups) : groups_(std::move(groups)) {
    for (auto it = groups_.begin(); it != groups_.end();)
      it = it->second.empty() ? groups_.erase(it) : std::next(it);
    for (auto& [key, members] : groups_) {
      std::sort(members.begin(), members.end(), [](const Member& a, const Member& b) { return a.user_id < b.user_id; });
      for (const auto& m : members)
        if (!std::isfinite(m.score) || m.score < 0.0)
          throw ValidationError("group " + key + " holds a negative or non-finite score");
    }
  }

  const std::map<std::string, std::vector<Member>>& groups() const noexcept { return groups_; }
  std::size_t group_count() const noexcept { return groups_.size(); }

  std::size_t user_count() const noexcept {
    std::size_t n = 0;
    for (const auto& [_, m] : groups_) n += m.size();
    return n;
  }

  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> out;
    for (const auto& [_, m] : groups_) out.push_back(m.size());
    return out;
  }

  std::vector<double> means() const {
    std::vector<double> out;
    for (const auto& [_, m] : groups_) {
      double s = 0.0;
      for (const auto& x : m) s += x.score;
      out.push_back(s / static_cast<double>(m.size()));
    }
    return out;
  }

  // Scores of all members, group by group.
  std::vector<double> flat_scores() const {
    std::vector<double> out;
    for (const auto& [_, m] : groups_)
      for (const auto& x : m) out.push_back(x.score);
    return out;
  }

  double grand_mean() const {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& [_, m] : groups_)
      for (const auto& x : m) s += x.score, ++n;
    return n ? s / static_cast<double>(n) : 0.0;
  }

 private:
  std::map<std::string, std::vector<Member>> groups_;
};

struct FormedGroups {
  GroupedScores grouped;
  std::size_t missing_attribute_users = 0;
};

/// Partitions scored users by the labels of `chosen` attributes, joined with
/// '|' in spec order. Users lacking any chosen attribute are left out and
/// counted.
inline FormedGroups form_groups(const AttributeTable& attrs, const GroupingSpec& spec,
                                const std::vector<std::string>& chosen,
                                const std::map<std::string, double>& scores) {
  if (chosen.empty()) throw ValidationError("no attributes chosen for grouping");
  std::vector<const AttributeRule*> rules;
  for (const auto& r : spec.rules)
    if (std::find(chosen.begin(), chosen.end(), r.name) != chosen.end()) rules.push_back(&r);
  for (const auto& c : chosen) spec.rule(c);

  FormedGroups out;
  std::map<std::string, std::vector<Member>> parts;
  for (const auto& [user, score] : scores) {
    auto row = attrs.find(user);
    std::string key;
    bool complete = row != attrs.end();
    for (std::size_t i = 0; complete && i < rules.size(); ++i) {
      auto v = row->second.find(rules[i]->name);
      if (v == row->second.end()) {
        complete = false;
        break;
      }
      if (i) key += '|';
      key += bin_attribute(*rules[i], v->second);
    }
    if (!complete) {
      ++out.missing_attribute_users;
      continue;
    }
    parts[key].push_back({user, score});
  }
  out.grouped = GroupedScores(std::move(parts));
  return out;
}

/// Unweighted group means in key order.
inline ScoreVector group_mean_vector(const GroupedScores& g) {
  if (g.group_count() == 0) throw ValidationError("no groups to aggregate");
  return ScoreVector(g.means(), SubjectKind::group);
}

/// Every user in a group of their own.
inline GroupedScores singleton_groups(const std::map<std::string, double>& scores) {
  std::map<std::string, std::vector<Member>> parts;
  for (const auto& [u, s] : scores) parts[u].push_back({u, s});
  return GroupedScores(std::move(parts));
}

inline GroupedScores single_group(const std::map<std::string, double>& scores) {
  std::map<std::string, std::vector<Member>> parts;
  for (const auto& [u, s] : scores) parts["all"].push_back({u, s});
  return GroupedScores(std::move(parts));
}

/// All size-`a` subsets of `names`, each in input order, lexicographic by index.
inline std::vector<std::vector<std::string>> attribute_subsets(const std::vector<std::string>& names, std::size_t a) {
  std::vector<std::vector<std::string>> out;
  if (a == 0 || a > names.size()) return out;
  std::vector<std::size_t> idx(a);
  for (std::size_t i = 0; i < a; ++i) idx[i] = i;
  while (true) {
    std::vector<std::string> s;
    for (auto i : idx) s.push_back(names[i]);
    out.push_back(std::move(s));
    std::size_t pos = a;
    while (pos > 0 && idx[pos - 1] == names.size() - a + pos - 1) --pos;
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t j = pos; j < a; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

// CSV with header `user_id,attr1,attr2,...`.
inline AttributeTable read_attributes(const std::string& path) {
  AttributeTable t;
  std::vector<std::string> header;
  io::for_each_record(path, ',', [&](const auto& f, std::size_t line) {
    if (header.empty()) {
      for (auto h : f) header.emplace_back(io::trim(h));
      if (header.size() < 2 || header[0] != "user_id")
        throw ValidationError(io::where(path, line) + ": header must start with user_id and name an attribute");
      return;
    }
    io::expect_fields(f, header.size(), path, line);
    auto user = std::string(io::trim(f[0]));
    if (user.empty()) throw ValidationError(io::where(path, line) + ": empty user id");
    if (t.count(user)) throw ValidationError(io::where(path, line) + ": duplicate user " + user);
    auto& row = t[user];
    for (std::size_t i = 1; i < f.size(); ++i) {
      auto v = io::trim(f[i]);
      if (!v.empty()) row[header[i]] = std::string(v);
    }
  });
  if (header.empty()) throw ValidationError(path + ": missing header");
  return t;
}

/// {"attributes": [{"name": "age", "type": "bins", "edges": [18,25,50],
///   "labels": ["18-24","25-49","50+"]}, {"name": "occupation", "type": "map",
///   "mapping": {...}, "default": "working"}, {"name": "gender", "type": "passthrough"}]}
inline GroupingSpec parse_grouping_spec(const nlohmann::json& j) {
  GroupingSpec spec;
  if (!j.contains("attributes") || !j["attributes"].is_array() || j["attributes"].empty())
    throw ValidationError("grouping spec needs a nonempty 'attributes' array");
  for (const auto& a : j["attributes"]) {
    AttributeRule rule;
    rule.name = a.at("name").get<std::string>();
    for (const auto& r : spec.rules)
      if (r.name == rule.name) throw ValidationError("attribute '" + rule.name + "' listed twice");
    auto type = a.at("type").get<std::string>();
    if (type == "passthrough") {
      rule.kind = Passthrough{};
    } else if (type == "map") {
      CategoricalMap m;
      for (const auto& [raw, label] : a.at("mapping").items()) m.mapping[raw] = label.get<std::string>();
      if (a.contains("default")) m.fallback = a["default"].get<std::string>();
      rule.kind = std::move(m);
    } else if (type == "bins") {
      NumericBins b;
      b.edges = a.at("edges").get<std::vector<double>>();
      b.labels = a.at("labels").get<std::vector<std::string>>();
      if (b.edges.empty() || !std::is_sorted(b.edges.begin(), b.edges.end()) ||
          std::adjacent_find(b.edges.begin(), b.edges.end()) != b.edges.end())
        throw ValidationError("bins of '" + rule.name + "' need strictly increasing edges");
      if (b.labels.size() != b.edges.size() && b.labels.size() + 1 != b.edges.size())
        throw ValidationError("bins of '" + rule.name + "' need one label per bin");
      rule.kind = std::move(b);
    } else {
      throw ValidationError("unknown attribute rule type '" + type + "'");
    }
    spec.rules.push_back(std::move(rule));
  }
  return spec;
}

inline GroupingSpec read_grouping_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return parse_grouping_spec(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

}  // namespace fairscan::grouping
