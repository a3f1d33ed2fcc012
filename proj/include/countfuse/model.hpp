#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "countfuse/corpus.hpp"
#include "countfuse/eval.hpp"
#include "countfuse/vectorize.hpp"

namespace countfuse {

inline constexpr std::size_t kNumClasses = 2;

/// Single affine layer + softmax over a fused feature vector.
struct ModelParams {
  /// Row-major [kNumClasses x layout.total()], rows indexed by kNegative/kPositive.
  std::vector<double> weights;
  std::array<double, kNumClasses> bias{};
  FeatureLayout layout;
  LabelPair labels;

  std::size_t input_dim() const { return layout.total(); }
  double& w(std::size_t cls, std::size_t col) { return weights[cls * input_dim() + col]; }
  double w(std::size_t cls, std::size_t col) const { return weights[cls * input_dim() + col]; }

  bool operator==(const ModelParams&) const = default;
};

struct ClassWeights {
  double positive = 1.0;
  double negative = 1.0;

  double operator[](int cls) const { return cls == kPositive ? positive : negative; }
  bool operator==(const ClassWeights&) const = default;
};

/// Parses "positive:negative", e.g. "10:1".
ClassWeights parse_class_weights(const std::string& text);
std::string to_string(const ClassWeights& cw);

struct TrainConfig {
  double learning_rate = 5e-6;
  std::size_t batch_size = 32;
  std::size_t epochs = 2;
  std::uint64_t seed = 1;
  ClassWeights class_weights;
  double threshold = 0.5;

  /// Large-corpus profile: lr 5e-6, 2 epochs.
  static TrainConfig task_a();
  /// Small-corpus profile: lr 5e-5, 20 epochs.
  static TrainConfig task_b();

  /// Throws InvalidArgument on out-of-range fields.
  void validate() const;
};

struct LabeledFeatures {
  std::vector<FeatureVector> features;
  std::vector<int> labels;  // kNegative / kPositive

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
};

struct EpochRecord {
  double mean_loss = 0.0;  // weighted loss over the training set after the epoch
  double train_macro_f1 = 0.0;
  double dev_macro_f1 = 0.0;
  bool has_dev = false;
  std::size_t steps = 0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 0-based
};

struct TrainResult {
  ModelParams params;
  TrainHistory history;
};

/// Weights uniform in [-0.05, 0.05] drawn from splitmix64(seed), bias zero.
ModelParams init_model(const FeatureLayout& layout, const LabelPair& labels, std::uint64_t seed);

using Probabilities = std::array<double, kNumClasses>;

/// softmax(W x + b). Throws DimMismatch when layouts differ.
Probabilities forward(const ModelParams& params, const FeatureVector& fv);

/// cw[gold] * -ln(max(p_gold, 1e-12)).
double weighted_loss(const Probabilities& probs, int gold, const ClassWeights& cw);

struct Gradient {
  std::vector<double> weights;
  std::array<double, kNumClasses> bias{};
};

/// Analytic gradient of the batch-mean weighted cross-entropy.
/// Throws EmptyBatch, DimMismatch.
Gradient gradient(const ModelParams& params, std::span<const FeatureVector> batch,
                  std::span<const int> labels, const ClassWeights& cw);

/// Batch-mean weighted loss, the quantity `gradient` differentiates.
double mean_weighted_loss(const ModelParams& params, std::span<const FeatureVector> batch,
                          std::span<const int> labels, const ClassWeights& cw);

/// Mini-batch Adam (0.9, 0.999, 1e-8) over batches reshuffled each epoch.
/// Returns the parameters from the epoch with the best dev macro-F1 (earliest
/// on ties), or the last epoch without a dev set.
/// Throws EmptyTrainSet, NonFiniteLoss, DimMismatch.
TrainResult train(const TrainConfig& config, const LabeledFeatures& train_set,
                  const LabeledFeatures& dev_set, const LabelPair& labels);

/// kPositive iff p_positive >= threshold.
int predict(const ModelParams& params, const FeatureVector& fv, double threshold);
std::vector<int> predict_all(const ModelParams& params, std::span<const FeatureVector> fvs,
                             double threshold);

EvalReport evaluate(const ModelParams& params, const LabeledFeatures& data, double threshold);

inline constexpr std::uint32_t kModelFormatVersion = 1;

/// "FDM1" | u32 version | 3 x u32 layout | negative, positive label names
/// (u32 length + UTF-8) | weights then bias as f64, all little-endian.
void save_model(const ModelParams& params, const std::filesystem::path& path);
/// Throws BadMagic, VersionMismatch, CorruptPayload, MissingFile.
ModelParams load_model(const std::filesystem::path& path);

}  // namespace countfuse
