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

// Fairness measures over a vector of base scores. The same functions serve
// per-user vectors (individual fairness) and group-mean vectors (group
// fairness); only FStat needs the full partition.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairscan/common.hpp"
#include "fairscan/grouping.hpp"

namespace fairscan::fairness {

enum class Measure { min, range, sd, mad, gini, atkinson, cv, fstat, kl, gce };

inline constexpr std::array kGroupMeasures = {Measure::min, Measure::range, Measure::sd,   Measure::mad, Measure::gini,
                                              Measure::atkinson, Measure::cv, Measure::fstat, Measure::kl, Measure::gce};
inline constexpr std::array kIndividualMeasures = {Measure::sd, Measure::gini, Measure::atkinson};

inline const char* to_string(Measure m) {
  switch (m) {
    case Measure::min: return "min";
    case Measure::range: return "range";
    case Measure::sd: return "sd";
    case Measure::mad: return "mad";
    case Measure::gini: return "gini";
    case Measure::atkinson: return "atkinson";
    case Measure::cv: return "cv";
    case Measure::fstat: return "fstat";
    case Measure::kl: return "kl";
    case Measure::gce: return "gce";
  }
  return "?";
}

inline std::optional<Measure> parse_measure(std::string_view s) {
  for (auto m : kGroupMeasures)
    if (s == to_string(m)) return m;
  return std::nullopt;
}

inline Orientation orientation(Measure m) {
  return m == Measure::min ? Orientation::higher_better : Orientation::lower_better;
}

enum class KlDirection { uniform_to_scores, scores_to_uniform };

struct MeasureParams {
  double epsilon = 0.5;         // Atkinson inequality aversion
  double beta = 2.0;            // GCE exponent
  double delta = 1e-6;          // additive smoothing for KL and GCE
  double worst_fraction = 0.25; // share of subjects averaged by Min
  KlDirection kl_direction = KlDirection::uniform_to_scores;

  void validate() const {
    if (!(epsilon > 0.0)) throw ParameterError("epsilon must be > 0");
    if (beta == 0.0 || beta == 1.0 || !std::isfinite(beta)) throw ParameterError("beta must not be 0 or 1");
    if (!(delta > 0.0)) throw ParameterError("smoothing delta must be > 0");
    if (!(worst_fraction > 0.0 && worst_fraction <= 1.0)) throw ParameterError("worst fraction must be in (0,1]");
  }
};

struct MeasureResult {
  Measure id;
  double value = 0.0;
  Orientation orientation = Orientation::lower_better;
  std::string params;
};

namespace detail {

inline double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline std::string param(const char* name, double v) { return std::string(name) + "=" + io::exact(v); }

// Equal scores are perfectly equal; skip the arithmetic that would leave round-off.
inline bool constant(std::span<const double> v) {
  return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
}

}  // namespace detail

/// Sum over all ordered pairs of |v_i - v_j|, via the sorted form
/// 2 * sum_i (2i - n - 1) x_(i) with 1-based ranks.
inline double pairwise_abs_sum(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  const auto n = static_cast<double>(s.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) acc += (2.0 * static_cast<double>(i + 1) - n - 1.0) * s[i];
  return 2.0 * acc;
}

inline double gini_value(std::span<const double> v) {
  if (v.size() < 2 || detail::constant(v)) return 0.0;
  const double mu = detail::mean(v);
  if (mu <= 0.0) return 0.0;
  const auto n = static_cast<double>(v.size());
  return pairwise_abs_sum(v) / (2.0 * n * n * mu);
}

/// Weighted power mean of order 1 - epsilon, the Atkinson equally distributed
/// equivalent. Zero entries drive it to 0 when epsilon >= 1.
inline double ede(std::span<const double> v, std::span<const double> weights, double epsilon) {
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be > 0");
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  if (epsilon == 1.0) {
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (weights[i] == 0.0) continue;
      if (v[i] <= 0.0) return 0.0;
      acc += weights[i] * std::log(v[i]);
    }
    return std::exp(acc / wsum);
  }
  const double p = 1.0 - epsilon;
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (weights[i] == 0.0) continue;
    if (v[i] <= 0.0) {
      if (p < 0.0) return 0.0;
      continue;
    }
    acc += weights[i] * std::pow(v[i], p);
  }
  return std::pow(acc / wsum, 1.0 / p);
}

inline double ede(std::span<const double> v, double epsilon) {
  std::vector<double> w(v.size(), 1.0);
  return ede(v, w, epsilon);
}

inline double atkinson_value(std::span<const double> v, double epsilon) {
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be > 0");
  if (detail::constant(v)) return 0.0;
  const double mu = detail::mean(v);
  if (mu <= 0.0) return 0.0;
  return 1.0 - ede(v, epsilon) / mu;
}

inline double population_sd(std::span<const double> v) {
  if (detail::constant(v)) return 0.0;
  const double mu = detail::mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

inline MeasureResult gini(const ScoreVector& v) {
  return {Measure::gini, gini_value(v.values()), Orientation::lower_better, ""};
}

inline MeasureResult atkinson(const ScoreVector& v, double epsilon) {
  return {Measure::atkinson, atkinson_value(v.values(), epsilon), Orientation::lower_better,
          detail::param("epsilon", epsilon)};
}

struct Dispersion {
  double range = 0.0;
  double sd = 0.0;
  double mad = 0.0;  // mean absolute difference over ordered pairs i != j
  double cv = 0.0;
};

inline Dispersion dispersion(const ScoreVector& v) {
  Dispersion d;
  const auto& x = v.values();
  if (x.size() < 2) return d;
  auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const auto n = static_cast<double>(x.size());
  const double mu = v.mean();
  d.range = *hi - *lo;
  d.sd = population_sd(x);
  d.mad = pairwise_abs_sum(x) / (n * (n - 1.0));
  d.cv = mu > 0.0 ? d.sd / mu : 0.0;
  return d;
}

/// Mean of the max(1, floor(fraction * n)) smallest scores.
inline MeasureResult min_worst_quartile(const ScoreVector& v, double worst_fraction) {
  if (!(worst_fraction > 0.0 && worst_fraction <= 1.0)) throw ParameterError("worst fraction must be in (0,1]");
  std::vector<double> s = v.values();
  std::sort(s.begin(), s.end());
  const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(worst_fraction * static_cast<double>(s.size()))));
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) acc += s[i];
  return {Measure::min, acc / static_cast<double>(m), Orientation::higher_better, detail::param("fraction", worst_fraction)};
}

/// One-way ANOVA F over the members of each group.
inline MeasureResult f_statistic(const grouping::GroupedScores& g) {
  const auto G = g.group_count();
  const auto N = g.user_count();
  if (G < 2) throw ValidationError("FStat needs at least two groups");
  if (N <= G) throw ValidationError("FStat needs more users than groups");
  const double mu = g.grand_mean();
  double between = 0.0, within = 0.0;
  for (const auto& [_, members] : g.groups()) {
    double s = 0.0;
    for (const auto& m : members) s += m.score;
    const double mg = s / static_cast<double>(members.size());
    between += static_cast<double>(members.size()) * (mg - mu) * (mg - mu);
    for (const auto& m : members) within += (m.score - mg) * (m.score - mg);
  }
  const double ms_between = between / static_cast<double>(G - 1);
  const double ms_within = within / static_cast<double>(N - G);
  // Sums of squares below this are round-off from equal scores.
  constexpr double kTiny = 1e-300;
  if (ms_within <= kTiny) {
    if (ms_between <= kTiny) return {Measure::fstat, 0.0, Orientation::lower_better, ""};
    throw DegenerateError("degenerate: infinite F (zero within-group variance)");
  }
  return {Measure::fstat, ms_between / ms_within, Orientation::lower_better, ""};
}

namespace detail {

inline std::vector<double> smoothed_distribution(std::span<const double> v, double delta) {
  std::vector<double> p(v.begin(), v.end());
  double total = 0.0;
  for (auto& x : p) total += (x += delta);
  for (auto& x : p) x /= total;
  return p;
}

}  // namespace detail

inline MeasureResult kl_uniform(const ScoreVector& v, double delta, KlDirection dir = KlDirection::uniform_to_scores) {
  if (v.size() < 2) throw ValidationError("KL needs at least two subjects");
  if (!(delta > 0.0)) throw ParameterError("smoothing delta must be > 0");
  const auto p = detail::smoothed_distribution(v.values(), delta);
  const double u = 1.0 / static_cast<double>(p.size());
  double kl = 0.0;
  for (double pi : p) kl += dir == KlDirection::uniform_to_scores ? u * std::log(u / pi) : pi * std::log(pi / u);
  const char* d = dir == KlDirection::uniform_to_scores ? ";direction=u||p" : ";direction=p||u";
  return {Measure::kl, std::max(0.0, kl), Orientation::lower_better, detail::param("delta", delta) + d};
}

/// Generalized cross entropy against the uniform distribution, normalized by
/// beta * (beta - 1) so that it is nonnegative for every admissible beta.
inline MeasureResult gce(const ScoreVector& v, double beta, double delta) {
  if (beta == 0.0 || beta == 1.0) throw ParameterError("beta must not be 0 or 1");
  if (!(delta > 0.0)) throw ParameterError("smoothing delta must be > 0");
  if (v.size() < 2) throw ValidationError("GCE needs at least two subjects");
  const auto p = detail::smoothed_distribution(v.values(), delta);
  const double pf = 1.0 / static_cast<double>(p.size());
  double acc = 0.0;
  for (double pi : p) acc += std::pow(pf, beta) * std::pow(pi, 1.0 - beta);
  const double value = (acc - 1.0) / (beta * (beta - 1.0));
  return {Measure::gce, std::max(0.0, value), Orientation::lower_better,
          detail::param("beta", beta) + ";" + detail::param("delta", delta)};
}

// One measure of a battery; failures keep their message instead of a value.
struct BatteryEntry {
  Measure id;
  SubjectKind kind;
  std::optional<double> value;
  std::string params;
  std::string error;

  Orientation orientation() const { return fairness::orientation(id); }
};

using Battery = std::vector<BatteryEntry>;

namespace detail {

template <class Fn>
BatteryEntry guarded(Measure id, SubjectKind kind, Fn&& fn) {
  BatteryEntry e{id, kind, std::nullopt, "", ""};
  try {
    MeasureResult r = fn();
    e.value = r.value;
    e.params = r.params;
  } catch (const DegenerateError& ex) {
    e.error = ex.what();
  } catch (const ParameterError&) {
    throw;
  } catch (const ValidationError& ex) {
    e.error = ex.what();
  }
  return e;
}

}  // namespace detail

inline MeasureResult evaluate(Measure m, const ScoreVector& v, const MeasureParams& p) {
  switch (m) {
    case Measure::min: return min_worst_quartile(v, p.worst_fraction);
    case Measure::range: return {m, dispersion(v).range, Orientation::lower_better, ""};
    case Measure::sd: return {m, dispersion(v).sd, Orientation::lower_better, ""};
    case Measure::mad: return {m, dispersion(v).mad, Orientation::lower_better, ""};
    case Measure::cv: return {m, dispersion(v).cv, Orientation::lower_better, ""};
    case Measure::gini: return gini(v);
    case Measure::atkinson: return atkinson(v, p.epsilon);
    case Measure::kl: return kl_uniform(v, p.delta, p.kl_direction);
    case Measure::gce: return gce(v, p.beta, p.delta);
    case Measure::fstat: break;
  }
  throw ValidationError(std::string(to_string(m)) + " cannot be computed from a score vector alone");
}

/// All group measures: FStat on the partition, the rest on unweighted group means.
inline Battery group_battery(const grouping::GroupedScores& g, const MeasureParams& p) {
  p.validate();
  const auto means = grouping::group_mean_vector(g);
  Battery out;
  for (auto m : kGroupMeasures) {
    if (m == Measure::fstat)
      out.push_back(detail::guarded(m, SubjectKind::group, [&] { return f_statistic(g); }));
    else
      out.push_back(detail::guarded(m, SubjectKind::group, [&] { return evaluate(m, means, p); }));
  }
  return out;
}

inline Battery individual_battery(const ScoreVector& v, const MeasureParams& p) {
  p.validate();
  Battery out;
  for (auto m : kIndividualMeasures)
    out.push_back(detail::guarded(m, SubjectKind::individual, [&] { return evaluate(m, v, p); }));
  return out;
}

}  // namespace fairscan::fairness
