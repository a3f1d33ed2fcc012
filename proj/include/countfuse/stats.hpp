#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "countfuse/corpus.hpp"
#include "countfuse/eval.hpp"
#include "countfuse/model.hpp"
#include "countfuse/pipeline.hpp"

namespace countfuse {

enum class WilcoxonMethod { Exact, NormalApprox };

std::string to_string(WilcoxonMethod method);

struct WilcoxonResult {
  double w_plus = 0.0;
  double w_minus = 0.0;
  std::size_t n_effective = 0;
  double p_two_sided = 1.0;
  WilcoxonMethod method = WilcoxonMethod::Exact;
};

/// Largest number of non-zero differences handled by the exact null
/// distribution; larger samples use the normal approximation.
inline constexpr std::size_t kWilcoxonExactMaxN = 25;

/// Signed-rank test on the differences first - second. Zero differences are
/// dropped, tied |d| get average ranks. For n <= 25 the two-sided p-value is
/// 2 * min(P(W+ <= w), P(W+ >= w)), capped at 1, under the exact null
/// distribution of W+ for the observed ranks. Otherwise a normal
/// approximation with tie and continuity correction is used.
/// Throws AllZeroDifferences.
WilcoxonResult wilcoxon_signed_rank(std::span<const std::pair<double, double>> pairs);
WilcoxonResult wilcoxon_signed_rank(std::span<const double> differences);

/// Per-term document-frequency rates (df / n_docs) of `first` and `second`
/// over the `top_k` most frequent stemmed terms of the two corpora combined.
/// Feeds the default train-vs-dev Wilcoxon check.
std::vector<std::pair<double, double>> document_frequency_pairs(const Dataset& first,
                                                                const Dataset& second,
                                                                std::size_t top_k = 100);

struct GridRow {
  ClassWeights weights;
  EvalReport train;
  EvalReport dev;
};

struct GridSearchResult {
  std::vector<GridRow> rows;
  std::size_t best = 0;  // max dev macro-F1, first occurrence on ties
};

/// Default grid: positive:negative = 1:1, 4:1, 10:1, 50:1, 100:1.
std::vector<ClassWeights> default_weight_grid();
std::vector<ClassWeights> parse_weight_grid(const std::string& text);

/// One full training run per grid point with `base_config` and that point's
/// class weights. Training errors are rethrown with the grid point named.
GridSearchResult weight_grid_search(const LabeledFeatures& train, const LabeledFeatures& dev,
                                    std::span<const ClassWeights> grid,
                                    const TrainConfig& base_config, const LabelPair& labels);

struct ScalingRow {
  double fraction = 1.0;
  std::size_t train_size = 0;
  EvalReport train;
  EvalReport dev;
};

/// For each fraction (ascending, in (0, 1]) draws a stratified subsample of
/// `train` seeded with `subsample_seed`, fits the feature pipeline on it and
/// trains one model; reports are on the subsample and on `dev`.
/// Throws DegenerateSplit when a fraction leaves a class empty.
std::vector<ScalingRow> data_scaling_run(std::span<const double> fractions,
                                         const TrainConfig& config, const Dataset& train,
                                         const Dataset& dev, const FeatureConfig& features,
                                         const FeatureInputs& inputs,
                                         std::uint64_t subsample_seed);

std::string grid_tsv(const GridSearchResult& result, const LabelPair& labels);
std::string scaling_tsv(std::span<const ScalingRow> rows);

}  // namespace countfuse
