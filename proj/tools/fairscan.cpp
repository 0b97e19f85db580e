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

// fairscan: effectiveness and fairness evaluation of ranked recommendations.
//
// Exit codes: 0 success, 2 validation error, 3 finished with degenerate
// measures (undefined values are marked in the outputs).

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fairscan/fairscan.hpp"

namespace {

namespace fs = std::filesystem;
using namespace fairscan;

constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kDegenerate = 3;

struct CommonFlags {
  std::string manifest;
  std::string out = "fairscan-out";
  std::string base;
  report::Overrides overrides;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool manifest_required = true) {
  auto* m = cmd->add_option("--manifest", f.manifest, "Manifest JSON")->check(CLI::ExistingFile);
  if (manifest_required) m->required();
  cmd->add_option("--out", f.out, "Output directory")->capture_default_str();
  cmd->add_option("--k", f.overrides.k, "Cutoff k");
  cmd->add_option("--base", f.base, "Base score: p or ndcg");
  cmd->add_option("--epsilon", f.overrides.epsilon, "Atkinson epsilon");
  cmd->add_option("--beta", f.overrides.beta, "GCE beta");
  cmd->add_option("--delta", f.overrides.delta, "KL/GCE smoothing");
  cmd->add_option("--threshold", f.overrides.threshold, "Matcher similarity threshold");
  cmd->add_option("--worst-fraction", f.overrides.worst_fraction, "Share of subjects averaged by Min");
}

report::Context context(CommonFlags& f) {
  auto m = report::load_manifest(f.manifest);
  if (!f.base.empty()) f.overrides.base = report::parse_base(f.base);
  report::apply(m, f.overrides);
  return report::load_context(std::move(m), &std::cerr);
}

prep::SplitRatio parse_ratio(const std::string& s) {
  auto parts = io::split(s, ':');
  if (parts.size() != 3) throw ValidationError("ratio must look like 3:1:1");
  prep::SplitRatio r;
  r.train = static_cast<int>(io::parse_int(parts[0], "--ratio", 0));
  r.val = static_cast<int>(io::parse_int(parts[1], "--ratio", 0));
  r.test = static_cast<int>(io::parse_int(parts[2], "--ratio", 0));
  r.validate();
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fairscan: group and individual fairness of ranked recommendations"};
  app.require_subcommand(1);

  std::string prep_input, prep_ratio = "3:1:1", prep_out = "fairscan-out";
  prep::PrepConfig prep_cfg;
  auto* prep_cmd = app.add_subcommand("prep", "k-core filter, temporal split and prune an interaction log");
  prep_cmd->add_option("--input", prep_input, "Interactions TSV")->required()->check(CLI::ExistingFile);
  prep_cmd->add_option("--core", prep_cfg.core_level, "k-core level")->capture_default_str();
  prep_cmd->add_option("--ratio", prep_ratio, "train:val:test ratio")->capture_default_str();
  prep_cmd->add_option("--min-train", prep_cfg.min_train_interactions,
                       "Drop users/items with at most this many train interactions")
      ->capture_default_str();
  prep_cmd->add_option("--out", prep_out, "Output directory")->capture_default_str();

  CommonFlags eval_f, sweep_f, decomp_f, agree_f, match_f;
  auto* eval_cmd = app.add_subcommand("eval", "Effectiveness plus group and individual fairness per system");
  add_common(eval_cmd, eval_f);
  auto* sweep_cmd = app.add_subcommand("sweep", "Fairness averaged over groupings by 1..A attributes");
  add_common(sweep_cmd, sweep_f);
  auto* decomp_cmd = app.add_subcommand("decompose", "Between/within-group decomposition for every grouping");
  add_common(decomp_cmd, decomp_f);

  std::vector<std::string> batteries;
  auto* agree_cmd = app.add_subcommand("agree", "Kendall tau-b agreement between fairness measures");
  add_common(agree_cmd, agree_f, false);
  double agree_threshold = 0.9;
  agree_cmd->add_option("--battery", batteries, "Fairness battery CSVs, one per system (instead of --manifest)")
      ->check(CLI::ExistingFile);
  agree_cmd->add_option("--equivalence", agree_threshold, "tau at or above which measures count as equivalent")
      ->capture_default_str();

  std::string catalog, free_text;
  int ngram = 3;
  auto* match_cmd = app.add_subcommand("match", "Resolve free-text runs to item ids");
  add_common(match_cmd, match_f, false);
  match_cmd->add_option("--catalog", catalog, "Catalog TSV (instead of --manifest)")->check(CLI::ExistingFile);
  match_cmd->add_option("--input", free_text, "Free-text run TSV")->check(CLI::ExistingFile);
  match_cmd->add_option("--ngram", ngram, "Character n-gram size")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*prep_cmd) {
      prep_cfg.ratio = parse_ratio(prep_ratio);
      prep_cfg.validate();
      auto split = prep::run_pipeline(prep::read_interactions(prep_input), prep_cfg);
      fs::create_directories(prep_out);
      prep::write_interactions((fs::path(prep_out) / "train.tsv").string(), split.train);
      prep::write_interactions((fs::path(prep_out) / "val.tsv").string(), split.val);
      prep::write_interactions((fs::path(prep_out) / "test.tsv").string(), split.test);
      auto out = io::open_out((fs::path(prep_out) / "stats.json").string());
      out << prep::stats_json(prep::compute_stats(split)).dump(2) << '\n';
      return kOk;
    }
    if (*eval_cmd) {
      auto o = report::cmd_eval(context(eval_f), eval_f.out);
      return o.warnings ? kDegenerate : kOk;
    }
    if (*sweep_cmd) {
      report::cmd_sweep(context(sweep_f), sweep_f.out);
      return kOk;
    }
    if (*decomp_cmd) {
      return report::cmd_decompose(context(decomp_f), decomp_f.out) ? kDegenerate : kOk;
    }
    if (*agree_cmd) {
      if (!batteries.empty()) {
        if (!agree_f.manifest.empty()) throw ValidationError("give either --manifest or --battery, not both");
        std::vector<fairness::Battery> b;
        std::vector<std::string> ids;
        for (const auto& p : batteries) {
          b.push_back(report::read_battery(p));
          ids.push_back(fs::path(p).stem().string());
        }
        auto a = report::agreement_from_batteries(b, agree_threshold);
        for (const auto& [id, why] : a.full.excluded) std::cerr << "warning: excluded " << id << ": " << why << '\n';
        return report::write_agreement(agree_f.out, a, ids) ? kDegenerate : kOk;
      }
      if (agree_f.manifest.empty()) throw ValidationError("agree needs --manifest or at least two --battery files");
      auto ctx = context(agree_f);
      if (agree_cmd->count("--equivalence")) ctx.manifest.agreement_threshold = agree_threshold;
      std::size_t warnings = 0;
      report::cmd_agree(ctx, agree_f.out, &warnings);
      return warnings ? kDegenerate : kOk;
    }
    if (*match_cmd) {
      if (!catalog.empty()) {
        if (free_text.empty()) throw ValidationError("match --catalog also needs --input");
        matcher::MatcherConfig cfg;
        cfg.ngram_size = ngram;
        if (match_f.overrides.threshold) cfg.threshold = *match_f.overrides.threshold;
        cfg.validate();
        auto index = matcher::build_index(matcher::read_catalog(catalog), cfg);
        auto r = matcher::resolve_run(matcher::read_free_text_run(free_text), index, cfg);
        fs::create_directories(match_f.out);
        auto path = fs::path(match_f.out) / ("run_" + fs::path(free_text).stem().string() + ".tsv");
        effectiveness::write_run(path.string(), r.run, &r.scores);
        std::cerr << "matched " << r.matched << " of " << r.lines << " lines\n";
        return kOk;
      }
      if (match_f.manifest.empty()) throw ValidationError("match needs --manifest or --catalog/--input");
      auto ctx = context(match_f);
      if (match_cmd->count("--ngram")) throw ValidationError("--ngram applies to --catalog mode; set it in the manifest");
      if (!ctx.index) throw ValidationError("manifest has no catalog");
      report::cmd_match(ctx, match_f.out);
      return kOk;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const DegenerateError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDegenerate;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }
  return kOk;
}
