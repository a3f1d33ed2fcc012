#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "countfuse/preprocess.hpp"

namespace countfuse {

inline constexpr std::size_t kDefaultVocabularyCap = 6000;

class Vocabulary {
 public:
  Vocabulary() = default;
  /// `terms` must be sorted and unique.
  explicit Vocabulary(std::vector<std::string> terms);

  const std::vector<std::string>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  /// Position of `term`, or -1 when out of vocabulary.
  std::ptrdiff_t index_of(const std::string& term) const;

  bool operator==(const Vocabulary& other) const { return terms_ == other.terms_; }

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Keeps the `cap` terms with the highest total term frequency (ties broken
/// lexicographically ascending), then orders them lexicographically.
/// Throws EmptyCorpus when the corpus contains no tokens.
Vocabulary build_vocabulary(std::span<const TokenSequence> corpus,
                            std::size_t cap = kDefaultVocabularyCap);

struct IdfTable {
  std::vector<double> idf;  // aligned with Vocabulary::terms()
  std::size_t n_docs = 0;
};

/// idf(t) = ln((1 + N) / (1 + df(t))) + 1.
IdfTable compute_idf(std::span<const TokenSequence> corpus, const Vocabulary& vocab);

struct SparseEntry {
  std::uint32_t index;
  double value;

  bool operator==(const SparseEntry&) const = default;
};

struct SparseVector {
  std::vector<SparseEntry> entries;  // strictly increasing index, no zeros
  std::size_t dim = 0;
};

/// Raw count x idf per in-vocabulary term, L2-normalised. Documents with no
/// in-vocabulary tokens give an empty vector.
SparseVector tfidf_vector(const TokenSequence& doc, const Vocabulary& vocab,
                          const IdfTable& idf);

using DenseVector = std::vector<double>;

struct EmbeddingTable {
  std::size_t dim = 0;
  std::vector<std::string> ids;  // file order
  std::unordered_map<std::string, DenseVector> vectors;

  std::size_t size() const { return ids.size(); }
  const DenseVector* find(const std::string& id) const;
  /// Throws DimMismatch on wrong length, DuplicateId on a repeated id.
  void add(const std::string& id, DenseVector v);
};

/// Reads the binary "EMB1" format, or the `id<TAB>v1,v2,...` TSV alternative
/// (used for paths ending in .tsv or .txt).
/// Throws BadMagic, DimMismatch, TruncatedFile, DuplicateId, MissingFile.
EmbeddingTable load_embeddings(const std::filesystem::path& path);
/// Binary EMB1: "EMB1" | u32 dim | u64 count | per record: u16 id length,
/// id bytes, dim x f32, all little-endian.
void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);

/// Signed random-projection bag encoding. Each token t adds +1 to dimension j
/// when bit 0 of splitmix64_finalize(fnv1a64(t) + j * golden) ^ seed is set,
/// -1 otherwise; the sum is L2-normalised. No tokens gives the zero vector.
DenseVector fallback_encode(const TokenSequence& tokens, std::size_t dim, std::uint64_t seed);

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> std;

  std::size_t dim() const { return mean.size(); }
  /// Per-dimension mean and population standard deviation.
  static Standardizer fit(std::span<const DenseVector> rows, std::size_t dim);
  static Standardizer identity(std::size_t dim);
};

/// Below this the dimension is passed through uncentred.
inline constexpr double kMinStd = 1e-12;

struct FeatureLayout {
  std::uint32_t dense_dim = 0;
  std::uint32_t sparse_dim = 0;
  std::uint32_t extra_dim = 0;

  std::size_t total() const {
    return std::size_t{dense_dim} + sparse_dim + extra_dim;
  }
  bool operator==(const FeatureLayout&) const = default;
};

struct FeatureVector {
  DenseVector dense;
  SparseVector sparse;
  std::vector<double> extra;
  FeatureLayout layout;

  /// Materialises the concatenation [dense | sparse | extra].
  std::vector<double> to_dense() const;
};

/// Concatenates the standardised dense part, the (already normalised) sparse
/// part and ln(1 + x) of each extra count. Throws DimMismatch when the
/// standardizer width differs from the dense width.
FeatureVector fuse(const DenseVector& dense, const SparseVector& sparse,
                   std::span<const double> extra, const Standardizer& standardizer);

}  // namespace countfuse
