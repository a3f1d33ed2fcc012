#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "countfuse/corpus.hpp"

namespace countfuse {

/// Class indices used throughout training and evaluation.
inline constexpr int kNegative = 0;
inline constexpr int kPositive = 1;

struct ConfusionMatrix {
  LabelPair labels;
  /// counts[gold][predicted], indexed by kNegative / kPositive.
  std::array<std::array<std::size_t, 2>, 2> counts{};

  std::size_t total() const;
  std::size_t tp() const { return counts[kPositive][kPositive]; }
  std::size_t tn() const { return counts[kNegative][kNegative]; }
  std::size_t fp() const { return counts[kNegative][kPositive]; }
  std::size_t fn() const { return counts[kPositive][kNegative]; }

  bool operator==(const ConfusionMatrix&) const = default;
};

/// Throws LengthMismatch, UnknownLabel.
ConfusionMatrix confusion(std::span<const std::string> golds,
                          std::span<const std::string> preds, const LabelPair& labels);
ConfusionMatrix confusion(std::span<const int> golds, std::span<const int> preds,
                          const LabelPair& labels);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct EvalReport {
  LabelPair labels;
  ConfusionMatrix matrix;
  std::array<ClassMetrics, 2> per_class;  // kNegative, kPositive
  double macro_f1 = 0.0;
  double accuracy = 0.0;

  const ClassMetrics& positive() const { return per_class[kPositive]; }
  const ClassMetrics& negative() const { return per_class[kNegative]; }
};

/// Zero denominators give 0 for the affected metric.
EvalReport metrics(const ConfusionMatrix& cm);

/// Metrics of the constant predictor that always answers `label`.
/// Throws EmptyGolds, UnknownLabel.
EvalReport baseline_all(const std::string& label, std::span<const std::string> golds,
                        const LabelPair& labels);
EvalReport baseline_all(int label, std::span<const int> golds, const LabelPair& labels);

/// Flat `key=value` lines, one metric per line.
std::string to_key_value(const EvalReport& report);
/// Header and row for experiment tables; `name` fills the first column.
std::string tsv_header();
std::string to_tsv_row(const std::string& name, const EvalReport& report);

/// Fixed-point formatting used by every report writer.
std::string format_metric(double value);

}  // namespace countfuse
