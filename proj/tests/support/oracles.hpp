#pragma once

// Independent reference implementations used only by tests. They share no
// code paths with the library routines they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "countfuse/model.hpp"

namespace countfuse::testing {

/// Nested-loop TF-IDF over an explicit term list.
inline std::map<std::string, double> brute_force_tfidf(
    const std::vector<std::string>& doc, const std::vector<std::vector<std::string>>& corpus,
    const std::vector<std::string>& terms) {
  std::map<std::string, double> raw;
  const double n = static_cast<double>(corpus.size());
  for (const auto& term : terms) {
    double tf = 0;
    for (const auto& t : doc) tf += (t == term) ? 1.0 : 0.0;
    if (tf == 0) continue;
    double df = 0;
    for (const auto& d : corpus) {
      bool present = false;
      for (const auto& t : d) present = present || (t == term);
      df += present ? 1.0 : 0.0;
    }
    raw[term] = tf * (std::log((1.0 + n) / (1.0 + df)) + 1.0);
  }
  double norm = 0;
  for (const auto& [t, v] : raw) norm += v * v;
  norm = std::sqrt(norm);
  for (auto& [t, v] : raw) v /= norm;
  return raw;
}

/// Mean weighted cross-entropy computed on materialised dense inputs.
inline double reference_loss(const std::vector<double>& weights, const std::vector<double>& bias,
                             const std::vector<std::vector<double>>& xs,
                             const std::vector<int>& ys, const ClassWeights& cw) {
  const std::size_t dim = xs.empty() ? 0 : xs[0].size();
  double total = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double z[2] = {bias[0], bias[1]};
    for (int c = 0; c < 2; ++c) {
      for (std::size_t j = 0; j < dim; ++j) z[c] += weights[c * dim + j] * xs[i][j];
    }
    const double lse = std::log(std::exp(z[0]) + std::exp(z[1]));
    const double w = ys[i] == kPositive ? cw.positive : cw.negative;
    total += w * (lse - z[ys[i]]);
  }
  return total / static_cast<double>(xs.size());
}

/// Average ranks of |d| by counting, O(n^2).
inline std::vector<double> reference_ranks(const std::vector<double>& magnitudes) {
  std::vector<double> ranks;
  for (double m : magnitudes) {
    double less = 0, equal = 0;
    for (double o : magnitudes) {
      less += o < m ? 1 : 0;
      equal += o == m ? 1 : 0;
    }
    ranks.push_back(less + (equal + 1.0) / 2.0);
  }
  return ranks;
}

struct EnumeratedWilcoxon {
  double w_plus = 0;
  double p_two_sided = 1;
};

/// Two-sided exact p by listing all 2^n sign assignments.
inline EnumeratedWilcoxon enumerate_wilcoxon(const std::vector<double>& differences) {
  std::vector<double> mags;
  std::vector<bool> pos;
  for (double d : differences) {
    if (d != 0) {
      mags.push_back(std::fabs(d));
      pos.push_back(d > 0);
    }
  }
  const auto ranks = reference_ranks(mags);
  EnumeratedWilcoxon r;
  for (std::size_t i = 0; i < ranks.size(); ++i) r.w_plus += pos[i] ? ranks[i] : 0.0;
  const std::uint64_t total = std::uint64_t{1} << ranks.size();
  std::uint64_t le = 0, ge = 0;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    double w = 0;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
      if (mask & (std::uint64_t{1} << i)) w += ranks[i];
    }
    if (w <= r.w_plus + 1e-9) ++le;
    if (w >= r.w_plus - 1e-9) ++ge;
  }
  r.p_two_sided = std::min(1.0, 2.0 * static_cast<double>(std::min(le, ge)) / static_cast<double>(total));
  return r;
}

/// Per-example scorer: precision/recall/F1 from explicit loops over examples.
struct BruteScores {
  double f1[2] = {0, 0};
  double precision[2] = {0, 0};
  double recall[2] = {0, 0};
  double macro = 0;
};

inline BruteScores brute_scores(const std::vector<int>& golds, const std::vector<int>& preds) {
  BruteScores s;
  for (int c = 0; c < 2; ++c) {
    double hit = 0, predicted = 0, actual = 0;
    for (std::size_t i = 0; i < golds.size(); ++i) {
      if (preds[i] == c) predicted += 1;
      if (golds[i] == c) actual += 1;
      if (preds[i] == c && golds[i] == c) hit += 1;
    }
    s.precision[c] = predicted > 0 ? hit / predicted : 0;
    s.recall[c] = actual > 0 ? hit / actual : 0;
    s.f1[c] = (predicted + actual) > 0 ? 2 * hit / (predicted + actual) : 0;
  }
  s.macro = (s.f1[0] + s.f1[1]) / 2;
  return s;
}

}  // namespace countfuse::testing

namespace countfuse::testing {

/// Central-difference check of `gradient` against `mean_weighted_loss`.
/// Relative error per coordinate is |a - n| / max(|a|, |n|, floor); the floor
/// keeps coordinates whose true value is ~0 from dividing round-off by zero.
inline double max_gradient_relative_error(ModelParams params, std::span<const FeatureVector> xs,
                                          std::span<const int> ys, const ClassWeights& cw,
                                          double h = 1e-6, double floor = 1e-6) {
  const auto g = gradient(params, xs, ys, cw);
  double worst = 0;
  auto check = [&](double& slot, double analytic) {
    const double saved = slot;
    slot = saved + h;
    const double up = mean_weighted_loss(params, xs, ys, cw);
    slot = saved - h;
    const double down = mean_weighted_loss(params, xs, ys, cw);
    slot = saved;
    const double numeric = (up - down) / (2 * h);
    const double denom = std::max({std::fabs(analytic), std::fabs(numeric), floor});
    worst = std::max(worst, std::fabs(analytic - numeric) / denom);
  };
  for (std::size_t k = 0; k < params.weights.size(); ++k) check(params.weights[k], g.weights[k]);
  for (std::size_t c = 0; c < params.bias.size(); ++c) check(params.bias[c], g.bias[c]);
  return worst;
}

}  // namespace countfuse::testing
