#include "countfuse/vectorize.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "countfuse/error.hpp"
#include "countfuse/random.hpp"

namespace countfuse {

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (i > 0 && !(terms_[i - 1] < terms_[i])) {
      throw Error(ErrorKind::InvalidArgument, "vocabulary terms must be sorted and unique");
    }
    index_.emplace(terms_[i], i);
  }
}

std::ptrdiff_t Vocabulary::index_of(const std::string& term) const {
  const auto it = index_.find(term);
  return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

Vocabulary build_vocabulary(std::span<const TokenSequence> corpus, std::size_t cap) {
  if (cap == 0) throw Error(ErrorKind::InvalidArgument, "vocabulary cap must be >= 1");
  std::unordered_map<std::string, std::size_t> freq;
  for (const auto& doc : corpus) {
    for (const auto& t : doc.tokens) ++freq[t];
  }
  if (freq.empty()) throw Error(ErrorKind::EmptyCorpus, "corpus contains no tokens");

  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  const auto keep = std::min(cap, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep),
                    ranked.end(), [](const auto& a, const auto& b) {
                      return a.second != b.second ? a.second > b.second : a.first < b.first;
                    });
  std::vector<std::string> terms;
  terms.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) terms.push_back(std::move(ranked[i].first));
  std::sort(terms.begin(), terms.end());
  return Vocabulary(std::move(terms));
}

IdfTable compute_idf(std::span<const TokenSequence> corpus, const Vocabulary& vocab) {
  IdfTable table;
  table.n_docs = corpus.size();
  std::vector<std::size_t> df(vocab.size(), 0);
  std::unordered_set<std::ptrdiff_t> seen;
  for (const auto& doc : corpus) {
    seen.clear();
    for (const auto& t : doc.tokens) {
      const auto idx = vocab.index_of(t);
      if (idx >= 0 && seen.insert(idx).second) ++df[static_cast<std::size_t>(idx)];
    }
  }
  const double n = static_cast<double>(table.n_docs);
  table.idf.reserve(vocab.size());
  for (std::size_t d : df) {
    table.idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(d))) + 1.0);
  }
  return table;
}

SparseVector tfidf_vector(const TokenSequence& doc, const Vocabulary& vocab,
                          const IdfTable& idf) {
  if (idf.idf.size() != vocab.size()) {
    throw Error(ErrorKind::DimMismatch, "idf table is not aligned with the vocabulary");
  }
  SparseVector v;
  v.dim = vocab.size();
  std::vector<std::uint32_t> hits;
  hits.reserve(doc.size());
  for (const auto& t : doc.tokens) {
    const auto idx = vocab.index_of(t);
    if (idx >= 0) hits.push_back(static_cast<std::uint32_t>(idx));
  }
  if (hits.empty()) return v;
  std::sort(hits.begin(), hits.end());
  for (std::size_t i = 0; i < hits.size();) {
    std::size_t j = i;
    while (j < hits.size() && hits[j] == hits[i]) ++j;
    v.entries.push_back({hits[i], static_cast<double>(j - i) * idf.idf[hits[i]]});
    i = j;
  }
  double norm2 = 0.0;
  for (const auto& e : v.entries) norm2 += e.value * e.value;
  const double norm = std::sqrt(norm2);
  for (auto& e : v.entries) e.value /= norm;
  return v;
}

DenseVector fallback_encode(const TokenSequence& tokens, std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw Error(ErrorKind::InvalidArgument, "fallback encoder dim must be >= 1");
  DenseVector v(dim, 0.0);
  if (tokens.empty()) return v;
  for (const auto& t : tokens.tokens) {
    const std::uint64_t h = fnv1a64(t);
    for (std::size_t j = 0; j < dim; ++j) {
      const std::uint64_t bits =
          splitmix64_finalize(h + static_cast<std::uint64_t>(j) * kGoldenGamma) ^ seed;
      v[j] += (bits & 1U) ? 1.0 : -1.0;
    }
  }
  double norm2 = 0.0;
  for (double x : v) norm2 += x * x;
  if (norm2 > 0.0) {
    const double norm = std::sqrt(norm2);
    for (double& x : v) x /= norm;
  }
  return v;
}

Standardizer Standardizer::fit(std::span<const DenseVector> rows, std::size_t dim) {
  Standardizer s;
  s.mean.assign(dim, 0.0);
  s.std.assign(dim, 0.0);
  if (rows.empty()) {
    s.std.assign(dim, 1.0);
    return s;
  }
  for (const auto& r : rows) {
    if (r.size() != dim) throw Error(ErrorKind::DimMismatch, "dense row width differs");
    for (std::size_t j = 0; j < dim; ++j) s.mean[j] += r[j];
  }
  const double n = static_cast<double>(rows.size());
  for (double& m : s.mean) m /= n;
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = r[j] - s.mean[j];
      s.std[j] += d * d;
    }
  }
  for (double& sd : s.std) sd = std::sqrt(sd / n);
  return s;
}

Standardizer Standardizer::identity(std::size_t dim) {
  return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
}

std::vector<double> FeatureVector::to_dense() const {
  std::vector<double> out(layout.total(), 0.0);
  std::copy(dense.begin(), dense.end(), out.begin());
  for (const auto& e : sparse.entries) out[layout.dense_dim + e.index] = e.value;
  std::copy(extra.begin(), extra.end(),
            out.begin() + static_cast<std::ptrdiff_t>(layout.dense_dim + layout.sparse_dim));
  return out;
}

FeatureVector fuse(const DenseVector& dense, const SparseVector& sparse,
                   std::span<const double> extra, const Standardizer& standardizer) {
  if (standardizer.dim() != dense.size() || standardizer.std.size() != dense.size()) {
    throw Error(ErrorKind::DimMismatch,
                "standardizer has " + std::to_string(standardizer.dim()) +
                    " dimensions, dense vector has " + std::to_string(dense.size()));
  }
  FeatureVector fv;
  fv.dense.resize(dense.size());
  for (std::size_t j = 0; j < dense.size(); ++j) {
    const double sd = standardizer.std[j];
    fv.dense[j] = sd < kMinStd ? dense[j] : (dense[j] - standardizer.mean[j]) / sd;
  }
  fv.sparse = sparse;
  fv.extra.reserve(extra.size());
  for (double x : extra) fv.extra.push_back(std::log1p(x));
  fv.layout = {static_cast<std::uint32_t>(dense.size()), static_cast<std::uint32_t>(sparse.dim),
               static_cast<std::uint32_t>(extra.size())};
  return fv;
}

}  // namespace countfuse
