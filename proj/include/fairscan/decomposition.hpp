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

// Between/within-group decompositions of unfairness. All components are
// computed on size-weighted distributions: the "smoothed" vector gives each
// user their group's mean, so between-group terms here differ from the
// unweighted group-mean measures in fairness.hpp.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fairscan/common.hpp"
#include "fairscan/fairness.hpp"
#include "fairscan/grouping.hpp"

namespace fairscan::decomposition {

enum class IdentityKind {
  additive,               // total = between + within
  multiplicative,         // (1 - total) = (1 - between)(1 - within)
  additive_with_overlap,  // total = between + within + residual, residual >= 0
};

struct DecompositionResult {
  std::string measure_id;
  double total = 0.0;
  double between = 0.0;
  double within = 0.0;
  double residual = 0.0;
  IdentityKind identity = IdentityKind::additive;
};

/// Law of total variance with population variances. Components are variances;
/// see as_sd() for the standard-deviation view.
inline DecompositionResult decompose_variance(const grouping::GroupedScores& g) {
  const auto N = static_cast<double>(g.user_count());
  if (g.group_count() == 0 || N == 0) throw ValidationError("nothing to decompose");
  const double mu = g.grand_mean();
  DecompositionResult r{"variance"};
  for (const auto& [_, members] : g.groups()) {
    const auto ng = static_cast<double>(members.size());
    double s = 0.0;
    for (const auto& m : members) s += m.score;
    const double mg = s / ng;
    double ss = 0.0;
    for (const auto& m : members) ss += (m.score - mg) * (m.score - mg);
    r.between += (ng / N) * (mg - mu) * (mg - mu);
    r.within += (ng / N) * (ss / ng);
  }
  const double sd = fairness::population_sd(g.flat_scores());
  r.total = sd * sd;
  return r;
}

// Square roots of each variance component; SD_total^2 = SD_b^2 + SD_w^2.
inline DecompositionResult as_sd(const DecompositionResult& var) {
  return {"sd", std::sqrt(var.total), std::sqrt(var.between), std::sqrt(var.within), 0.0, IdentityKind::additive};
}

/// A_between = 1 - EDE(smoothed)/mean, A_within = 1 - EDE(x)/EDE(smoothed).
/// The product identity holds exactly because the EDE of the smoothed vector
/// is a size-weighted power mean of the group means.
inline DecompositionResult decompose_atkinson(const grouping::GroupedScores& g, double epsilon) {
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be > 0");
  const double mu = g.grand_mean();
  if (!(mu > 0.0)) throw DegenerateError("degenerate: Atkinson decomposition needs a positive mean");
  const auto means = g.means();
  std::vector<double> weights;
  for (auto n : g.sizes()) weights.push_back(static_cast<double>(n));
  const auto x = g.flat_scores();

  const double ede_smoothed = fairness::ede(means, weights, epsilon);
  if (!(ede_smoothed > 0.0)) throw DegenerateError("degenerate: zero between-group EDE");
  const double ede_all = fairness::ede(x, epsilon);

  DecompositionResult r{"atkinson"};
  r.identity = IdentityKind::multiplicative;
  r.total = 1.0 - ede_all / mu;
  r.between = 1.0 - ede_smoothed / mu;
  r.within = 1.0 - ede_all / ede_smoothed;
  return r;
}

/// Gini = between (Gini of the smoothed vector) + within (population share
/// times income share weighted group Ginis) + overlap residual.
inline DecompositionResult decompose_gini(const grouping::GroupedScores& g) {
  DecompositionResult r{"gini"};
  r.identity = IdentityKind::additive_with_overlap;
  const auto N = static_cast<double>(g.user_count());
  const double mu = g.grand_mean();
  if (!(mu > 0.0)) return r;

  const auto x = g.flat_scores();
  r.total = fairness::gini_value(x);

  std::vector<double> smoothed;
  smoothed.reserve(x.size());
  for (const auto& [_, members] : g.groups()) {
    std::vector<double> scores;
    for (const auto& m : members) scores.push_back(m.score);
    const auto ng = static_cast<double>(members.size());
    const double mg = fairness::detail::mean(scores);
    smoothed.insert(smoothed.end(), members.size(), mg);
    const double pop_share = ng / N;
    const double income_share = ng * mg / (N * mu);
    r.within += pop_share * income_share * fairness::gini_value(scores);
  }
  r.between = fairness::gini_value(smoothed);
  r.residual = r.total - r.between - r.within;
  return r;
}

}  // namespace fairscan::decomposition
