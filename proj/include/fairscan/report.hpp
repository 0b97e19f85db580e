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

// Manifest-driven pipeline behind the fairscan CLI. Every command writes
// plain CSV/TSV/JSON into an output directory and returns the number of
// degenerate-measure warnings it produced.

#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairscan/agreement.hpp"
#include "fairscan/common.hpp"
#include "fairscan/decomposition.hpp"
#include "fairscan/effectiveness.hpp"
#include "fairscan/fairness.hpp"
#include "fairscan/grouping.hpp"
#include "fairscan/matcher.hpp"

namespace fairscan::report {

namespace fs = std::filesystem;

enum class RunForm { id, free_text, scores };

struct SystemEntry {
  std::string id;
  std::string path;
  RunForm form = RunForm::id;
};

struct Manifest {
  std::vector<SystemEntry> systems;
  std::optional<std::string> judgments;
  std::optional<std::string> attributes;
  std::optional<std::string> grouping_spec;
  std::optional<std::string> catalog;
  effectiveness::EvalConfig eval;
  effectiveness::BaseScore base = effectiveness::BaseScore::ndcg;
  fairness::MeasureParams measures;
  matcher::MatcherConfig matcher;
  double agreement_threshold = 0.9;
};

// Command-line values that take precedence over the manifest.
struct Overrides {
  std::optional<int> k;
  std::optional<effectiveness::BaseScore> base;
  std::optional<double> epsilon, beta, delta, threshold, worst_fraction;
};

inline void apply(Manifest& m, const Overrides& o) {
  if (o.k) m.eval.k = *o.k;
  if (o.base) m.base = *o.base;
  if (o.epsilon) m.measures.epsilon = *o.epsilon;
  if (o.beta) m.measures.beta = *o.beta;
  if (o.delta) m.measures.delta = *o.delta;
  if (o.threshold) m.matcher.threshold = *o.threshold;
  if (o.worst_fraction) m.measures.worst_fraction = *o.worst_fraction;
}

inline effectiveness::BaseScore parse_base(const std::string& s) {
  if (s == "p" || s == "precision") return effectiveness::BaseScore::precision;
  if (s == "ndcg") return effectiveness::BaseScore::ndcg;
  throw ValidationError("base score must be 'p' or 'ndcg', got '" + s + "'");
}

inline void validate(const Manifest& m) {
  if (m.systems.empty()) throw ValidationError("manifest lists no systems");
  std::set<std::string> ids;
  for (const auto& s : m.systems) {
    if (s.id.empty() || !std::all_of(s.id.begin(), s.id.end(), [](char c) {
          return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
        }))
      throw ValidationError("system id '" + s.id + "' must be nonempty and use only [A-Za-z0-9._-]");
    if (!ids.insert(s.id).second) throw ValidationError("duplicate system id '" + s.id + "'");
    if (!fs::exists(s.path)) throw ValidationError("run file of " + s.id + " not found: " + s.path);
    if (s.form != RunForm::scores && !m.judgments) throw ValidationError("system " + s.id + " needs judgments");
    if (s.form == RunForm::free_text && !m.catalog) throw ValidationError("free-text system " + s.id + " needs a catalog");
  }
  for (const auto* p : {&m.judgments, &m.attributes, &m.grouping_spec, &m.catalog})
    if (*p && !fs::exists(**p)) throw ValidationError("file not found: " + **p);
  if (m.attributes.has_value() != m.grouping_spec.has_value())
    throw ValidationError("attributes and grouping_spec must be given together");
  m.eval.validate();
  m.measures.validate();
  m.matcher.validate();
  if (!(m.agreement_threshold >= -1.0 && m.agreement_threshold <= 1.0))
    throw ValidationError("agreement threshold must be in [-1,1]");
}

/// Parses a manifest; relative paths resolve against `base_dir`.
inline Manifest parse_manifest(const nlohmann::json& j, const fs::path& base_dir) {
  Manifest m;
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? p : (base_dir / p).string(); };
  try {
    for (const auto& s : j.at("systems")) {
      SystemEntry e;
      e.id = s.at("id").get<std::string>();
      e.path = resolve(s.at("run").get<std::string>());
      auto form = s.value("form", std::string("id"));
      if (form == "id") e.form = RunForm::id;
      else if (form == "free_text") e.form = RunForm::free_text;
      else if (form == "scores") e.form = RunForm::scores;
      else throw ValidationError("system " + e.id + ": unknown form '" + form + "'");
      m.systems.push_back(std::move(e));
    }
    for (auto [key, slot] : {std::pair{"judgments", &m.judgments}, std::pair{"attributes", &m.attributes},
                             std::pair{"grouping_spec", &m.grouping_spec}, std::pair{"catalog", &m.catalog}})
      if (j.contains(key)) *slot = resolve(j[key].get<std::string>());
    if (j.contains("eval")) {
      const auto& e = j["eval"];
      m.eval.k = e.value("k", m.eval.k);
      if (e.contains("base")) m.base = parse_base(e["base"].get<std::string>());
      if (e.value("mrr", std::string("cutoff")) == "full_list") m.eval.mrr = effectiveness::MrrMode::full_list;
    }
    if (j.contains("measures")) {
      const auto& p = j["measures"];
      m.measures.epsilon = p.value("epsilon", m.measures.epsilon);
      m.measures.beta = p.value("beta", m.measures.beta);
      m.measures.delta = p.value("delta", m.measures.delta);
      m.measures.worst_fraction = p.value("worst_fraction", m.measures.worst_fraction);
      if (p.value("kl_direction", std::string("u||p")) == "p||u")
        m.measures.kl_direction = fairness::KlDirection::scores_to_uniform;
    }
    if (j.contains("matcher")) {
      m.matcher.ngram_size = j["matcher"].value("ngram_size", m.matcher.ngram_size);
      m.matcher.threshold = j["matcher"].value("threshold", m.matcher.threshold);
    }
    m.agreement_threshold = j.value("agreement_threshold", m.agreement_threshold);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("manifest: ") + e.what());
  }
  return m;
}

inline Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open manifest " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return parse_manifest(j, fs::path(path).parent_path());
}

// Inputs shared by all systems, loaded once.
struct Context {
  Manifest manifest;
  effectiveness::Judgments judgments;
  std::optional<grouping::AttributeTable> attributes;
  std::optional<grouping::GroupingSpec> spec;
  std::optional<matcher::MatchIndex> index;
  std::ostream* log = nullptr;

  // Each distinct message is reported once.
  void warn(const std::string& msg) const {
    if (log && warned.insert(msg).second) *log << "warning: " << msg << '\n';
  }

  mutable std::set<std::string> warned;
};

inline Context load_context(Manifest m, std::ostream* log = nullptr) {
  validate(m);
  Context c;
  c.log = log;
  if (m.judgments) c.judgments = effectiveness::read_judgments(*m.judgments);
  if (m.attributes) {
    c.attributes = grouping::read_attributes(*m.attributes);
    c.spec = grouping::read_grouping_spec(*m.grouping_spec);
  }
  if (m.catalog) c.index = matcher::build_index(matcher::read_catalog(*m.catalog), m.matcher);
  c.manifest = std::move(m);
  return c;
}

struct SystemScores {
  std::string id;
  std::optional<effectiveness::RunEvaluation> evaluation;
  std::map<std::string, double> base;  // user -> base score
};

inline std::map<std::string, double> read_scores(const std::string& path) {
  std::map<std::string, double> out;
  io::for_each_record(path, '\t', [&](const auto& f, std::size_t line) {
    io::expect_fields(f, 2, path, line);
    double v = io::parse_double(f[1], path, line);
    if (!(v >= 0.0)) throw ValidationError(io::where(path, line) + ": scores must be nonnegative");
    if (!out.emplace(std::string(f[0]), v).second)
      throw ValidationError(io::where(path, line) + ": duplicate user " + std::string(f[0]));
  });
  if (out.empty()) throw ValidationError(path + ": no scores");
  return out;
}

inline effectiveness::RankedRun id_run(const Context& c, const SystemEntry& s) {
  if (s.form == RunForm::id) return effectiveness::read_run(s.path);
  auto resolved = matcher::resolve_run(matcher::read_free_text_run(s.path), *c.index, c.manifest.matcher);
  c.warn(s.id + ": matched " + std::to_string(resolved.matched) + " of " + std::to_string(resolved.lines) + " lines");
  return std::move(resolved.run);
}

inline SystemScores score_system(const Context& c, const SystemEntry& s) {
  SystemScores out;
  out.id = s.id;
  if (s.form == RunForm::scores) {
    out.base = read_scores(s.path);
    return out;
  }
  auto ev = effectiveness::evaluate_run(id_run(c, s), c.judgments, c.manifest.eval);
  if (ev.dropped_duplicates) c.warn(s.id + ": dropped " + std::to_string(ev.dropped_duplicates) + " duplicate items");
  if (ev.unjudged_users) c.warn(s.id + ": " + std::to_string(ev.unjudged_users) + " run users have no judgments");
  for (const auto& u : ev.users) out.base[u.user_id] = u.base(c.manifest.base);
  if (out.base.empty()) throw ValidationError(s.id + ": no judged users to evaluate");
  out.evaluation = std::move(ev);
  return out;
}

inline grouping::GroupedScores group_users(const Context& c, const std::vector<std::string>& chosen,
                                           const std::map<std::string, double>& scores, const std::string& system) {
  auto formed = grouping::form_groups(*c.attributes, *c.spec, chosen, scores);
  if (formed.missing_attribute_users)
    c.warn(system + ": " + std::to_string(formed.missing_attribute_users) + " users lack an attribute and were excluded");
  if (formed.grouped.group_count() == 0) throw ValidationError(system + ": no user could be grouped");
  return std::move(formed.grouped);
}

inline std::string series_id(fairness::Measure m, SubjectKind k) {
  return std::string(fairness::to_string(m)) + (k == SubjectKind::individual ? "_ind" : "_grp");
}

struct SystemReport {
  SystemScores scores;
  fairness::Battery group;  // empty when no attributes were given
  fairness::Battery individual;

  fairness::Battery all() const {
    fairness::Battery b = group;
    b.insert(b.end(), individual.begin(), individual.end());
    return b;
  }
};

inline SystemReport evaluate_system(const Context& c, const SystemEntry& s) {
  SystemReport r;
  r.scores = score_system(c, s);
  const auto& p = c.manifest.measures;
  std::vector<double> values;
  for (const auto& [_, v] : r.scores.base) values.push_back(v);
  r.individual = fairness::individual_battery(ScoreVector(values, SubjectKind::individual), p);
  if (c.spec) r.group = fairness::group_battery(group_users(c, c.spec->names(), r.scores.base, s.id), p);
  for (const auto& e : r.all())
    if (!e.value) c.warn(s.id + ": " + series_id(e.id, e.kind) + " undefined: " + e.error);
  return r;
}

inline std::size_t degenerate_count(const fairness::Battery& b) {
  return static_cast<std::size_t>(std::count_if(b.begin(), b.end(), [](const auto& e) { return !e.value; }));
}

// ---- battery files ----------------------------------------------------------

inline std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

inline void write_battery(const std::string& path, const fairness::Battery& b) {
  auto out = io::open_out(path);
  out << "measure_id,subject_kind,value,orientation,params\n";
  for (const auto& e : b) {
    out << fairness::to_string(e.id) << ',' << to_string(e.kind) << ',' << (e.value ? io::exact(*e.value) : "undefined")
        << ',' << to_string(e.orientation()) << ',' << csv_safe(e.value ? e.params : "error=" + e.error) << '\n';
  }
}

inline fairness::Battery read_battery(const std::string& path) {
  fairness::Battery b;
  bool header = true;
  io::for_each_record(path, ',', [&](const auto& f, std::size_t line) {
    if (header) {
      header = false;
      if (f.size() == 5 && f[0] == "measure_id") return;
    }
    io::expect_fields(f, 5, path, line);
    auto m = fairness::parse_measure(f[0]);
    if (!m) throw ValidationError(io::where(path, line) + ": unknown measure '" + std::string(f[0]) + "'");
    fairness::BatteryEntry e{*m, SubjectKind::group, std::nullopt, std::string(f[4]), ""};
    if (f[1] == "individual") e.kind = SubjectKind::individual;
    else if (f[1] != "group") throw ValidationError(io::where(path, line) + ": bad subject kind");
    if (f[2] == "undefined") e.error = std::string(f[4]);
    else e.value = io::parse_double(f[2], path, line);
    if (f[3] != to_string(e.orientation()))
      throw ValidationError(io::where(path, line) + ": orientation does not match measure");
    b.push_back(std::move(e));
  });
  return b;
}

// ---- eval -------------------------------------------------------------------

struct EvalOutcome {
  std::vector<SystemReport> systems;
  std::size_t warnings = 0;
};

inline void write_summary(const std::string& path, const std::vector<SystemReport>& reports) {
  auto out = io::open_out(path);
  out << "block,measure,orientation";
  for (const auto& r : reports) out << ',' << r.scores.id;
  out << '\n';
  if (std::any_of(reports.begin(), reports.end(), [](const auto& r) { return r.scores.evaluation.has_value(); })) {
    const char* names[] = {"hr", "mrr", "p", "ndcg"};
    for (int i = 0; i < 4; ++i) {
      out << "eff," << names[i] << ",higher_better";
      for (const auto& r : reports) {
        if (!r.scores.evaluation) {
          out << ",";
          continue;
        }
        auto m = r.scores.evaluation->mean();
        double v[] = {m.hr, m.mrr, m.precision, m.ndcg};
        out << ',' << io::fixed(v[i]);
      }
      out << '\n';
    }
  }
  auto block = [&](const char* name, auto pick) {
    const auto& first = pick(reports.front());
    for (std::size_t i = 0; i < first.size(); ++i) {
      out << name << ',' << fairness::to_string(first[i].id) << ',' << to_string(first[i].orientation());
      for (const auto& r : reports) {
        const auto& e = pick(r)[i];
        out << ',' << (e.value ? io::fixed(*e.value) : "undefined");
      }
      out << '\n';
    }
  };
  block("grp", [](const SystemReport& r) -> const fairness::Battery& { return r.group; });
  block("ind", [](const SystemReport& r) -> const fairness::Battery& { return r.individual; });
}

inline EvalOutcome cmd_eval(const Context& c, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  EvalOutcome o;
  for (const auto& s : c.manifest.systems) {
    auto r = evaluate_system(c, s);
    if (r.scores.evaluation)
      effectiveness::write_effectiveness((out_dir / ("effectiveness_" + s.id + ".tsv")).string(), *r.scores.evaluation);
    write_battery((out_dir / ("fairness_" + s.id + ".csv")).string(), r.all());
    o.warnings += degenerate_count(r.all());
    o.systems.push_back(std::move(r));
  }
  write_summary((out_dir / "summary.csv").string(), o.systems);
  return o;
}

// ---- sweep ------------------------------------------------------------------

struct SweepRow {
  std::string level;  // number of attributes, or "ind"
  std::size_t groupings = 0;
  double sd = 0.0, gini = 0.0, atkinson = 0.0;
};

/// Mean SD/Gini/Atkinson of group-mean vectors over every way of grouping by
/// `a` attributes, for a = 1..A, followed by the individual row.
inline std::vector<SweepRow> sweep_intersections(const Context& c, const std::map<std::string, double>& scores,
                                                 const std::string& system) {
  if (!c.spec) throw ValidationError("sweep needs attributes and a grouping spec");
  const auto names = c.spec->names();
  const double eps = c.manifest.measures.epsilon;
  std::vector<SweepRow> rows;
  for (std::size_t a = 1; a <= names.size(); ++a) {
    SweepRow row{std::to_string(a)};
    for (const auto& subset : grouping::attribute_subsets(names, a)) {
      auto v = grouping::group_mean_vector(group_users(c, subset, scores, system));
      row.sd += fairness::dispersion(v).sd;
      row.gini += fairness::gini(v).value;
      row.atkinson += fairness::atkinson(v, eps).value;
      ++row.groupings;
    }
    const auto n = static_cast<double>(row.groupings);
    row.sd /= n, row.gini /= n, row.atkinson /= n;
    rows.push_back(row);
  }
  std::vector<double> values;
  for (const auto& [_, v] : scores) values.push_back(v);
  ScoreVector ind(values, SubjectKind::individual);
  rows.push_back({"ind", 1, fairness::dispersion(ind).sd, fairness::gini(ind).value, fairness::atkinson(ind, eps).value});
  return rows;
}

inline std::map<std::string, std::vector<SweepRow>> cmd_sweep(const Context& c, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::map<std::string, std::vector<SweepRow>> all;
  for (const auto& s : c.manifest.systems) {
    auto rows = sweep_intersections(c, score_system(c, s).base, s.id);
    auto out = io::open_out((out_dir / ("sweep_" + s.id + ".csv")).string());
    out << "level,n_groupings,sd,gini,atkinson\n";
    for (const auto& r : rows)
      out << r.level << ',' << r.groupings << ',' << io::fixed(r.sd, 10) << ',' << io::fixed(r.gini, 10) << ','
          << io::fixed(r.atkinson, 10) << '\n';
    all[s.id] = std::move(rows);
  }
  return all;
}

// ---- decompose --------------------------------------------------------------

struct DecompositionRow {
  std::string grouping_id;
  std::size_t n_groups = 0;
  std::optional<decomposition::DecompositionResult> result;
  std::string measure_id;
  std::string error;
};

inline std::vector<DecompositionRow> decompose_grouping(const std::string& id, const grouping::GroupedScores& g,
                                                        double epsilon) {
  std::vector<DecompositionRow> rows;
  auto var = decomposition::decompose_variance(g);
  rows.push_back({id, g.group_count(), var, "variance", ""});
  rows.push_back({id, g.group_count(), decomposition::as_sd(var), "sd", ""});
  rows.push_back({id, g.group_count(), decomposition::decompose_gini(g), "gini", ""});
  try {
    rows.push_back({id, g.group_count(), decomposition::decompose_atkinson(g, epsilon), "atkinson", ""});
  } catch (const DegenerateError& e) {
    rows.push_back({id, g.group_count(), std::nullopt, "atkinson", e.what()});
  }
  return rows;
}

/// Decomposition rows for every attribute subset plus the singleton
/// ("individual") partition, ordered by group count.
inline std::vector<DecompositionRow> decompose_all(const Context& c, const std::map<std::string, double>& scores,
                                                   const std::string& system) {
  if (!c.spec) throw ValidationError("decompose needs attributes and a grouping spec");
  const auto names = c.spec->names();
  std::vector<DecompositionRow> rows;
  for (std::size_t a = 1; a <= names.size(); ++a)
    for (const auto& subset : grouping::attribute_subsets(names, a)) {
      std::string id;
      for (const auto& n : subset) id += (id.empty() ? "" : "+") + n;
      auto part = decompose_grouping(id, group_users(c, subset, scores, system), c.manifest.measures.epsilon);
      rows.insert(rows.end(), part.begin(), part.end());
    }
  auto ind = decompose_grouping("individual", grouping::singleton_groups(scores), c.manifest.measures.epsilon);
  rows.insert(rows.end(), ind.begin(), ind.end());
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.n_groups < b.n_groups || (a.n_groups == b.n_groups && a.grouping_id < b.grouping_id);
  });
  return rows;
}

inline void write_decomposition(const std::string& path, const std::vector<DecompositionRow>& rows) {
  auto out = io::open_out(path);
  out << "grouping_id,n_groups,measure_id,total,between,within,residual\n";
  for (const auto& r : rows) {
    out << r.grouping_id << ',' << r.n_groups << ',' << r.measure_id;
    if (r.result)
      out << ',' << io::exact(r.result->total) << ',' << io::exact(r.result->between) << ','
          << io::exact(r.result->within) << ',' << io::exact(r.result->residual) << '\n';
    else
      out << ",undefined,undefined,undefined,undefined\n";
  }
}

inline std::size_t cmd_decompose(const Context& c, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::size_t warnings = 0;
  for (const auto& s : c.manifest.systems) {
    auto rows = decompose_all(c, score_system(c, s).base, s.id);
    for (const auto& r : rows)
      if (!r.result) {
        ++warnings;
        c.warn(s.id + ": " + r.grouping_id + " " + r.measure_id + ": " + r.error);
      }
    write_decomposition((out_dir / ("decomposition_" + s.id + ".csv")).string(), rows);
  }
  return warnings;
}

// ---- agree ------------------------------------------------------------------

struct AgreementOutcome {
  agreement::AgreementMatrix ind_vs_grp;
  agreement::AgreementMatrix full;
};

/// Builds the individual-by-group matrix and the all-measures matrix from one
/// battery per system.
inline AgreementOutcome agreement_from_batteries(const std::vector<fairness::Battery>& batteries, double threshold) {
  if (batteries.size() < 2) throw ValidationError("agreement needs at least two systems");
  std::vector<agreement::MeasureSeries> ind, grp;
  auto find = [](std::vector<agreement::MeasureSeries>& v, const std::string& id) -> agreement::MeasureSeries* {
    for (auto& s : v)
      if (s.id == id) return &s;
    return nullptr;
  };
  for (std::size_t sys = 0; sys < batteries.size(); ++sys) {
    for (const auto& e : batteries[sys]) {
      auto& side = e.kind == SubjectKind::individual ? ind : grp;
      auto id = series_id(e.id, e.kind);
      auto* s = find(side, id);
      if (!s) {
        if (sys != 0) throw ValidationError("measure " + id + " missing from the first system");
        side.push_back({id, e.orientation(), {}});
        s = &side.back();
      }
      s->values.push_back(e.value);
    }
  }
  for (const auto* side : {&ind, &grp})
    for (const auto& s : *side)
      if (s.values.size() != batteries.size()) throw ValidationError("measure " + s.id + " missing from some system");

  std::vector<agreement::MeasureSeries> all = ind;
  all.insert(all.end(), grp.begin(), grp.end());
  return {agreement::agreement_matrix(ind, grp, threshold), agreement::agreement_matrix(all, all, threshold)};
}

inline void write_matrix(const std::string& path, const agreement::AgreementMatrix& m) {
  auto out = io::open_out(path);
  out << "measure";
  for (const auto& c : m.cols) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    out << m.rows[i];
    for (const auto& cell : m.cells[i]) out << ',' << (cell.tau ? io::fixed(*cell.tau) : "undefined");
    out << '\n';
  }
}

inline nlohmann::ordered_json agreement_summary(const AgreementOutcome& a, const std::vector<std::string>& systems) {
  nlohmann::ordered_json j;
  j["threshold"] = a.ind_vs_grp.threshold;
  j["systems"] = systems;
  auto pairs = [](const agreement::AgreementMatrix& m, bool skip_diagonal) {
    nlohmann::ordered_json eq = nlohmann::ordered_json::array(), undef = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < m.rows.size(); ++i)
      for (std::size_t k = 0; k < m.cols.size(); ++k) {
        if (skip_diagonal && k <= i) continue;
        const auto& c = m.cells[i][k];
        if (c.equivalent(m.threshold)) eq.push_back({{"a", m.rows[i]}, {"b", m.cols[k]}, {"tau", *c.tau}});
        if (!c.tau) undef.push_back({{"a", m.rows[i]}, {"b", m.cols[k]}, {"cause", c.cause}});
      }
    return std::pair{eq, undef};
  };
  auto [eq, undef] = pairs(a.ind_vs_grp, false);
  auto [eq_full, undef_full] = pairs(a.full, true);
  j["equivalent"] = eq;
  j["undefined"] = undef;
  j["equivalent_all_measures"] = eq_full;
  j["undefined_all_measures"] = undef_full;
  nlohmann::ordered_json ex = nlohmann::ordered_json::array();
  for (const auto& [id, why] : a.full.excluded) ex.push_back({{"measure", id}, {"reason", why}});
  j["excluded"] = ex;
  return j;
}

inline std::size_t write_agreement(const fs::path& out_dir, const AgreementOutcome& a,
                                   const std::vector<std::string>& systems) {
  fs::create_directories(out_dir);
  write_matrix((out_dir / "agreement.csv").string(), a.ind_vs_grp);
  write_matrix((out_dir / "agreement_full.csv").string(), a.full);
  auto out = io::open_out((out_dir / "agreement.json").string());
  out << agreement_summary(a, systems).dump(2) << '\n';
  return a.full.excluded.size();
}

inline AgreementOutcome cmd_agree(const Context& c, const fs::path& out_dir, std::size_t* warnings = nullptr) {
  if (c.manifest.systems.size() < 2) throw ValidationError("agree needs at least two systems");
  std::vector<fairness::Battery> batteries;
  std::vector<std::string> ids;
  for (const auto& s : c.manifest.systems) {
    batteries.push_back(evaluate_system(c, s).all());
    ids.push_back(s.id);
  }
  auto a = agreement_from_batteries(batteries, c.manifest.agreement_threshold);
  for (const auto& [id, why] : a.full.excluded) c.warn("excluded " + id + ": " + why);
  auto n = write_agreement(out_dir, a, ids);
  if (warnings) *warnings = n;
  return a;
}

// ---- match ------------------------------------------------------------------

inline std::size_t cmd_match(const Context& c, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::size_t written = 0;
  for (const auto& s : c.manifest.systems) {
    if (s.form != RunForm::free_text) continue;
    auto r = matcher::resolve_run(matcher::read_free_text_run(s.path), *c.index, c.manifest.matcher);
    c.warn(s.id + ": matched " + std::to_string(r.matched) + " of " + std::to_string(r.lines) + " lines");
    effectiveness::write_run((out_dir / ("run_" + s.id + ".tsv")).string(), r.run, &r.scores);
    ++written;
  }
  return written;
}

}  // namespace fairscan::report
