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

// Fuzzy matching of free-text recommendations to catalog items with TF-IDF
// weighted character n-grams and cosine similarity.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fairscan/common.hpp"
#include "fairscan/effectiveness.hpp"

namespace fairscan::matcher {

struct MatcherConfig {
  int ngram_size = 3;
  double threshold = 0.75;

  void validate() const {
    if (ngram_size < 1) throw ValidationError("n-gram size must be >= 1");
    if (!(threshold > 0.0 && threshold <= 1.0)) throw ValidationError("similarity threshold must be in (0,1]");
  }
};

namespace detail {

inline bool is_ascii_punct(unsigned char c) {
  return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) || (c >= 123 && c <= 126);
}

inline bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

// Splits UTF-8 into code points, one string each. Invalid lead bytes stand alone.
inline std::vector<std::string> code_points(const std::string& s) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < s.size();) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 1;
    if (i + len > s.size()) len = 1;
    out.push_back(s.substr(i, len));
    i += len;
  }
  return out;
}

}  // namespace detail

/// Lowercases ASCII letters, removes ASCII punctuation and collapses runs of
/// whitespace to one space, trimming both ends.
inline std::string normalize(const std::string& text) {
  std::string out;
  bool pending_space = false;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (detail::is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (detail::is_ascii_punct(c)) continue;
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
  }
  return out;
}

/// Raw counts of character n-grams of already normalized text. Text shorter
/// than n yields itself as its only gram.
inline std::map<std::string, int> ngram_counts(const std::string& normalized, int n) {
  std::map<std::string, int> counts;
  if (normalized.empty()) return counts;
  auto cps = detail::code_points(normalized);
  const auto size = static_cast<std::size_t>(n);
  if (cps.size() < size) {
    ++counts[normalized];
    return counts;
  }
  for (std::size_t i = 0; i + size <= cps.size(); ++i) {
    std::string gram;
    for (std::size_t j = 0; j < size; ++j) gram += cps[i + j];
    ++counts[gram];
  }
  return counts;
}

struct Match {
  std::string item_id;
  double similarity = 0.0;
};

class MatchIndex {
 public:
  using SparseVector = std::vector<std::pair<std::size_t, double>>;  // (term, weight), sorted by term

  /// tf = raw count, idf = ln((1 + N) / (1 + df)) + 1, rows L2-normalized.
  static MatchIndex build(const std::vector<std::pair<std::string, std::string>>& catalog, const MatcherConfig& cfg) {
    cfg.validate();
    if (catalog.empty()) throw ValidationError("empty catalog");
    MatchIndex idx;
    idx.ngram_size_ = cfg.ngram_size;
    std::vector<std::map<std::string, int>> counts;
    for (const auto& [id, name] : catalog) {
      auto norm = normalize(name);
      if (norm.empty()) throw ValidationError("catalog item " + id + " has an empty name");
      counts.push_back(ngram_counts(norm, cfg.ngram_size));
      idx.ids_.push_back(id);
    }
    std::vector<std::size_t> df;
    for (const auto& c : counts)
      for (const auto& [gram, _] : c) {
        auto [it, fresh] = idx.vocab_.emplace(gram, idx.vocab_.size());
        if (fresh) df.push_back(0);
        ++df[it->second];
      }
    const auto n_docs = static_cast<double>(catalog.size());
    for (auto d : df) idx.idf_.push_back(std::log((1.0 + n_docs) / (1.0 + static_cast<double>(d))) + 1.0);

    idx.postings_.resize(idx.idf_.size());
    for (std::size_t doc = 0; doc < counts.size(); ++doc) {
      auto vec = idx.weigh(counts[doc]);
      for (const auto& [term, w] : vec) idx.postings_[term].emplace_back(doc, w);
      idx.rows_.push_back(std::move(vec));
    }
    return idx;
  }

  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const SparseVector& row(std::size_t i) const { return rows_.at(i); }
  const std::vector<double>& idf() const noexcept { return idf_; }
  const std::unordered_map<std::string, std::size_t>& vocabulary() const noexcept { return vocab_; }
  int ngram_size() const noexcept { return ngram_size_; }

  /// Unit TF-IDF vector of `text`; n-grams outside the vocabulary are ignored.
  SparseVector vectorize(const std::string& text) const { return weigh(ngram_counts(normalize(text), ngram_size_)); }

  /// Cosine similarity of `text` against every catalog item.
  std::vector<double> similarities(const std::string& text) const {
    std::vector<double> sims(ids_.size(), 0.0);
    for (const auto& [term, w] : vectorize(text))
      for (const auto& [doc, dw] : postings_[term]) sims[doc] += w * dw;
    return sims;
  }

  /// Most similar item if its cosine reaches the threshold; ties go to the
  /// smallest item id.
  std::optional<Match> match_text(const std::string& text, double threshold) const {
    const auto sims = similarities(text);
    std::optional<Match> best;
    for (std::size_t i = 0; i < sims.size(); ++i) {
      if (sims[i] <= 0.0) continue;
      if (!best || sims[i] > best->similarity || (sims[i] == best->similarity && ids_[i] < best->item_id))
        best = Match{ids_[i], sims[i]};
    }
    if (!best || best->similarity < threshold) return std::nullopt;
    return best;
  }

 private:
  SparseVector weigh(const std::map<std::string, int>& counts) const {
    SparseVector v;
    double norm = 0.0;
    for (const auto& [gram, tf] : counts) {
      auto it = vocab_.find(gram);
      if (it == vocab_.end()) continue;
      double w = tf * idf_[it->second];
      v.emplace_back(it->second, w);
      norm += w * w;
    }
    std::sort(v.begin(), v.end());
    if (norm > 0.0) {
      norm = std::sqrt(norm);
      for (auto& [_, w] : v) w /= norm;
    }
    return v;
  }

  int ngram_size_ = 3;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> vocab_;
  std::vector<double> idf_;
  std::vector<SparseVector> rows_;
  std::vector<std::vector<std::pair<std::size_t, double>>> postings_;
};

inline MatchIndex build_index(const std::vector<std::pair<std::string, std::string>>& catalog, const MatcherConfig& cfg) {
  return MatchIndex::build(catalog, cfg);
}

inline std::optional<Match> match_text(const MatchIndex& index, const std::string& text, const MatcherConfig& cfg) {
  return index.match_text(text, cfg.threshold);
}

// user -> lines in generation order.
using FreeTextRun = std::map<std::string, std::vector<std::string>>;

struct ResolvedRun {
  effectiveness::RankedRun run;                       // placeholders are empty ids
  std::map<std::string, std::vector<double>> scores;  // cosine per position, 0 for placeholders
  std::size_t lines = 0;
  std::size_t matched = 0;
};

/// Resolves every line on its own. Unmatched lines and repeats of an already
/// resolved id become placeholders so ranks are preserved.
inline ResolvedRun resolve_run(const FreeTextRun& run, const MatchIndex& index, const MatcherConfig& cfg) {
  cfg.validate();
  ResolvedRun out;
  for (const auto& [user, lines] : run) {
    auto& ids = out.run[user];
    auto& sims = out.scores[user];
    std::vector<std::string> seen;
    for (const auto& text : lines) {
      ++out.lines;
      auto m = index.match_text(text, cfg.threshold);
      if (m && std::find(seen.begin(), seen.end(), m->item_id) == seen.end()) {
        seen.push_back(m->item_id);
        ids.push_back(m->item_id);
        sims.push_back(m->similarity);
        ++out.matched;
      } else {
        ids.emplace_back();
        sims.push_back(0.0);
      }
    }
  }
  return out;
}

// `item_id<TAB>item_name`.
inline std::vector<std::pair<std::string, std::string>> read_catalog(const std::string& path) {
  std::vector<std::pair<std::string, std::string>> out;
  io::for_each_record(path, '\t', [&](const auto& f, std::size_t line) {
    if (f.size() < 2) throw ValidationError(io::where(path, line) + ": expected item_id<TAB>item_name");
    std::string name(f[1]);
    for (std::size_t i = 2; i < f.size(); ++i) name += " " + std::string(f[i]);
    if (f[0].empty()) throw ValidationError(io::where(path, line) + ": empty item id");
    out.emplace_back(std::string(f[0]), std::move(name));
  });
  return out;
}

// `user_id<TAB>position<TAB>text`; lines are ordered by position per user.
inline FreeTextRun read_free_text_run(const std::string& path) {
  std::map<std::string, std::map<std::int64_t, std::string>> by_pos;
  io::for_each_record(path, '\t', [&](const auto& f, std::size_t line) {
    if (f.size() < 3) throw ValidationError(io::where(path, line) + ": expected user_id<TAB>position<TAB>text");
    if (f[0].empty()) throw ValidationError(io::where(path, line) + ": empty user id");
    auto pos = io::parse_int(f[1], path, line);
    std::string text(f[2]);
    for (std::size_t i = 3; i < f.size(); ++i) text += " " + std::string(f[i]);
    if (!by_pos[std::string(f[0])].emplace(pos, std::move(text)).second)
      throw ValidationError(io::where(path, line) + ": duplicate position " + std::to_string(pos));
  });
  FreeTextRun run;
  for (auto& [user, lines] : by_pos)
    for (auto& [_, text] : lines) run[user].push_back(std::move(text));
  return run;
}

}  // namespace fairscan::matcher
