#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "countfuse/corpus.hpp"
#include "countfuse/model.hpp"
#include "countfuse/preprocess.hpp"
#include "countfuse/vectorize.hpp"

namespace countfuse {

enum class DenseSource { None, Fallback, Embeddings };

DenseSource parse_dense_source(const std::string& name);
std::string to_string(DenseSource source);

/// Which feature blocks to build and how.
struct FeatureConfig {
  bool tfidf = true;
  std::size_t vocab_cap = kDefaultVocabularyCap;
  DenseSource dense = DenseSource::Fallback;
  std::size_t fallback_dim = 64;
  std::uint64_t fallback_seed = 0;
  bool noun_counts = false;

  bool any_enabled() const { return tfidf || dense != DenseSource::None || noun_counts; }
  bool operator==(const FeatureConfig&) const = default;
};

/// External inputs that are looked up by document id rather than fitted.
struct FeatureInputs {
  const EmbeddingTable* embeddings = nullptr;  // required for DenseSource::Embeddings
  const PosSidecar* pos_sidecar = nullptr;     // builtin heuristic when null
};

/// Fitted state: vocabulary and idf from the training corpus, dense
/// standardisation statistics from the training rows.
class FeaturePipeline {
 public:
  FeaturePipeline() = default;

  /// Throws InvalidArgument when no feature block is enabled, EmptyCorpus
  /// when TF-IDF is on and the training texts have no tokens.
  static FeaturePipeline fit(const Dataset& train, const FeatureConfig& config,
                             const FeatureInputs& inputs);

  LabeledFeatures transform(const Dataset& ds, const FeatureInputs& inputs) const;
  FeatureVector transform_one(const LabeledDocument& doc, const FeatureInputs& inputs) const;

  /// Same fitted state with feature blocks switched on or off; used to
  /// describe what a caller asks for at inference time. The layout of the
  /// result may no longer match models trained with the original switches.
  FeaturePipeline with_switches(bool tfidf, DenseSource dense, bool noun_counts) const;

  const FeatureConfig& config() const { return config_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  const IdfTable& idf() const { return idf_; }
  const Standardizer& standardizer() const { return standardizer_; }
  FeatureLayout layout() const;

  /// Text artifact: config, vocabulary with idf, standardizer. Doubles are
  /// written with 17 significant digits so reloads are exact.
  void save(const std::filesystem::path& path) const;
  static FeaturePipeline load(const std::filesystem::path& path);

 private:
  DenseVector dense_for(const LabeledDocument& doc, const TokenSequence& tokens,
                        const FeatureInputs& inputs) const;
  std::size_t dense_dim() const;

  FeatureConfig config_;
  Vocabulary vocab_;
  IdfTable idf_;
  Standardizer standardizer_;
};

/// Human-readable description of how two layouts differ, block by block;
/// empty when they are equal.
std::string describe_layout_mismatch(const FeatureLayout& model, const FeatureLayout& features);

}  // namespace countfuse
