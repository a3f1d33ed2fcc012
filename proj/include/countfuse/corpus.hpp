#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace countfuse {

struct LabeledDocument {
  std::string id;
  std::string text;
  std::string label;

  bool operator==(const LabeledDocument&) const = default;
};

/// Binary label pair. `positive` is the class of interest (OFF, UNT, ...).
struct LabelPair {
  std::string positive = "OFF";
  std::string negative = "NOT";

  bool operator==(const LabelPair&) const = default;
  bool contains(const std::string& label) const {
    return label == positive || label == negative;
  }
};

struct Dataset {
  std::vector<LabeledDocument> documents;  // load order
  LabelPair labels;
  std::string source;

  std::size_t size() const { return documents.size(); }
  bool empty() const { return documents.empty(); }
  std::size_t empty_text_count() const;
};

enum class DatasetFormat {
  OlidTsv,       // header row; id<TAB>tweet<TAB>subtask_a[<TAB>subtask_b]
  TwoColumnTsv,  // text<TAB>label, no header, ids "r<row_no>"
};

DatasetFormat parse_dataset_format(const std::string& name);
std::string to_string(DatasetFormat format);

struct LoadOptions {
  /// For olid-tsv: 0 reads subtask_a (column 3), 1 reads subtask_b (column 4).
  int olid_label_column = 0;
  /// olid-tsv sub-task B files carry "NULL" for the untargeted-irrelevant
  /// rows of sub-task A; when set, rows whose label is this value are skipped.
  std::string skip_label;
};

/// Throws Error{MissingFile}, RowError{MalformedRow | UnknownLabel},
/// Error{DuplicateId}.
Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                     const LabelPair& labels, const LoadOptions& options = {});

/// Writes `ds` so that load_dataset reproduces the (id, text, label) triples.
/// two-column-tsv does not store ids, so only olid-tsv round-trips ids.
void write_dataset(const Dataset& ds, const std::filesystem::path& path,
                   DatasetFormat format);

struct SplitRatio {
  std::uint32_t train = 4;
  std::uint32_t dev = 1;
};

SplitRatio parse_split_ratio(const std::string& text);

/// Stratified, seeded train/dev partition.
///
/// Per class (positive first, then negative) the document ids are sorted
/// lexicographically and shuffled with Fisher-Yates driven by one splitmix64
/// stream seeded with `seed`, shared across both classes in that order. The
/// first dev_c ids of each shuffled class go to dev. dev_c starts at
/// max(1, floor(n_c * dev / (train + dev))), capped at n_c - 1; remaining dev
/// slots up to round(N * dev / (train + dev)) are handed out by largest
/// fractional remainder. Both outputs keep load order.
///
/// Throws EmptyDataset, DegenerateSplit (a class with fewer than two
/// documents cannot appear on both sides).
std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, SplitRatio ratio,
                                          std::uint64_t seed);

/// Deterministic stratified subsample keeping round(n_c * fraction) documents
/// of each class (shuffled the same way as split_dataset), returned in load
/// order. fraction == 1 returns `ds` unchanged. A class that would vanish
/// raises DegenerateSplit.
Dataset stratified_subsample(const Dataset& ds, double fraction, std::uint64_t seed);

struct ClassShare {
  std::size_t count = 0;
  double fraction = 0.0;
};

struct ImbalanceReport {
  LabelPair labels;
  std::size_t total = 0;
  std::map<std::string, ClassShare> per_class;
};

ImbalanceReport class_distribution(const Dataset& ds);

}  // namespace countfuse
