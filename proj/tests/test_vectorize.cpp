#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "countfuse/error.hpp"
#include "countfuse/random.hpp"
#include "countfuse/vectorize.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace countfuse;
using countfuse::testing::TempDir;

namespace {

TokenSequence seq(std::vector<std::string> tokens) {
  TokenSequence s;
  s.tokens = std::move(tokens);
  s.original_len = s.tokens.size();
  return s;
}

template <typename F>
ErrorKind error_kind(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected countfuse::Error";
  return ErrorKind::InvalidArgument;
}

// Written out independently of random.hpp.
std::uint64_t ref_fnv(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t ref_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<double> ref_fallback(const std::vector<std::string>& tokens, std::size_t dim,
                                 std::uint64_t seed) {
  std::vector<double> v(dim, 0.0);
  for (const auto& t : tokens) {
    for (std::size_t j = 0; j < dim; ++j) {
      const auto bits = ref_mix(ref_fnv(t) + j * 0x9E3779B97F4A7C15ULL) ^ seed;
      v[j] += (bits & 1) ? 1.0 : -1.0;
    }
  }
  double n = 0;
  for (double x : v) n += x * x;
  if (n > 0) {
    for (double& x : v) x /= std::sqrt(n);
  }
  return v;
}

}  // namespace

TEST(Vocabulary, SpecExamples) {
  const std::vector<TokenSequence> corpus = {seq({"a", "b", "a"}), seq({"b", "c"})};
  EXPECT_EQ(build_vocabulary(corpus, 2).terms(), (std::vector<std::string>{"a", "b"}));
  const std::vector<TokenSequence> flat = {seq({"c", "b", "a"})};
  EXPECT_EQ(build_vocabulary(flat, 2).terms(), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(build_vocabulary(corpus, 100).terms(), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Vocabulary, OrderIsLexicographicAfterSelection) {
  const std::vector<TokenSequence> corpus = {seq({"z", "z", "z", "m", "m", "a"})};
  const auto vocab = build_vocabulary(corpus, 2);
  EXPECT_EQ(vocab.terms(), (std::vector<std::string>{"m", "z"}));
  EXPECT_EQ(vocab.index_of("z"), 1);
  EXPECT_EQ(vocab.index_of("a"), -1);
}

TEST(Vocabulary, EmptyCorpus) {
  EXPECT_EQ(error_kind([] { build_vocabulary(std::vector<TokenSequence>{}, 5); }),
            ErrorKind::EmptyCorpus);
  EXPECT_EQ(error_kind([] { build_vocabulary(std::vector<TokenSequence>{seq({})}, 5); }),
            ErrorKind::EmptyCorpus);
}

TEST(Vocabulary, InvariantUnderDocumentPermutation) {
  SplitMix64 rng(3);
  for (int round = 0; round < 100; ++round) {
    std::vector<TokenSequence> corpus;
    for (std::size_t d = 0; d < 1 + rng.next_below(20); ++d) {
      std::vector<std::string> toks;
      for (std::size_t k = 0; k < 1 + rng.next_below(8); ++k) {
        toks.push_back(std::string(1, static_cast<char>('a' + rng.next_below(10))));
      }
      corpus.push_back(seq(toks));
    }
    const auto cap = 1 + rng.next_below(10);
    const auto before = build_vocabulary(corpus, cap);
    fisher_yates(std::span<TokenSequence>(corpus), rng);
    EXPECT_EQ(build_vocabulary(corpus, cap), before);
    EXPECT_LE(before.size(), cap);
  }
}

TEST(Idf, SpecExamples) {
  const std::vector<TokenSequence> corpus = {seq({"a", "b"}), seq({"a", "c"})};
  const Vocabulary vocab({"a", "b", "zz"});
  const auto idf = compute_idf(corpus, vocab);
  EXPECT_EQ(idf.n_docs, 2u);
  EXPECT_DOUBLE_EQ(idf.idf[0], 1.0);
  EXPECT_NEAR(idf.idf[1], 1.4054651081081644, 1e-15);
  EXPECT_NEAR(idf.idf[2], 2.09861228866811, 1e-14);
}

TEST(TfIdf, SpecExample) {
  const std::vector<TokenSequence> corpus = {seq({"a", "b"}), seq({"a", "c"})};
  const auto vocab = build_vocabulary(corpus, 10);
  const auto idf = compute_idf(corpus, vocab);
  const auto v = tfidf_vector(seq({"a", "b"}), vocab, idf);
  ASSERT_EQ(v.entries.size(), 2u);
  EXPECT_EQ(v.dim, 3u);
  EXPECT_EQ(v.entries[0].index, 0u);
  EXPECT_EQ(v.entries[1].index, 1u);
  EXPECT_NEAR(v.entries[0].value, 0.5797386715376657, 1e-12);
  EXPECT_NEAR(v.entries[1].value, 0.8148024746671689, 1e-12);
  EXPECT_NEAR(1.0 / v.entries[0].value, 1.7249151196825583, 1e-12);
}

TEST(TfIdf, EmptyAndOovDocuments) {
  const std::vector<TokenSequence> corpus = {seq({"a", "b"})};
  const auto vocab = build_vocabulary(corpus, 10);
  const auto idf = compute_idf(corpus, vocab);
  EXPECT_TRUE(tfidf_vector(seq({}), vocab, idf).entries.empty());
  const auto oov = tfidf_vector(seq({"x", "y"}), vocab, idf);
  EXPECT_TRUE(oov.entries.empty());
  EXPECT_EQ(oov.dim, 2u);
}

TEST(TfIdf, MatchesBruteForceOracleOnRandomCorpora) {
  SplitMix64 rng(17);
  for (int round = 0; round < 300; ++round) {
    std::vector<std::vector<std::string>> raw;
    std::vector<TokenSequence> corpus;
    for (std::size_t d = 0; d < 1 + rng.next_below(20); ++d) {
      std::vector<std::string> toks;
      for (std::size_t k = 0; k < rng.next_below(12); ++k) {
        toks.push_back("t" + std::to_string(rng.next_below(10)));
      }
      raw.push_back(toks);
      corpus.push_back(seq(toks));
    }
    if (std::all_of(raw.begin(), raw.end(), [](const auto& d) { return d.empty(); })) continue;
    const auto vocab = build_vocabulary(corpus, 1 + rng.next_below(10));
    const auto idf = compute_idf(corpus, vocab);
    for (std::size_t d = 0; d < raw.size(); ++d) {
      const auto v = tfidf_vector(corpus[d], vocab, idf);
      const auto expected = countfuse::testing::brute_force_tfidf(raw[d], raw, vocab.terms());
      ASSERT_EQ(v.entries.size(), expected.size());
      double norm = 0;
      for (std::size_t k = 0; k < v.entries.size(); ++k) {
        if (k > 0) EXPECT_LT(v.entries[k - 1].index, v.entries[k].index);
        EXPECT_NE(v.entries[k].value, 0.0);
        const auto& term = vocab.terms()[v.entries[k].index];
        EXPECT_NEAR(v.entries[k].value, expected.at(term), 1e-12);
        norm += v.entries[k].value * v.entries[k].value;
      }
      if (!v.entries.empty()) EXPECT_NEAR(std::sqrt(norm), 1.0, 1e-9);
    }
    for (double x : idf.idf) EXPECT_GE(x, 1.0);
  }
}

TEST(Fallback, MatchesIndependentRecipe) {
  const auto a = fallback_encode(seq({"a"}), 4, 42);
  EXPECT_EQ(a, (DenseVector{-0.5, 0.5, 0.5, -0.5}));
  EXPECT_EQ(a, ref_fallback({"a"}, 4, 42));

  const auto v = fallback_encode(seq({"you", "are", "dumbbb"}), 8, 7);
  const DenseVector frozen = {-0.15811388300841897, -0.4743416490252569, 0.15811388300841897,
                              -0.4743416490252569, 0.15811388300841897, 0.4743416490252569,
                              -0.15811388300841897, -0.4743416490252569};
  for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(v[j], frozen[j], 1e-15);

  SplitMix64 rng(8);
  for (int round = 0; round < 200; ++round) {
    std::vector<std::string> toks;
    for (std::size_t k = 0; k < rng.next_below(10); ++k) {
      toks.push_back("w" + std::to_string(rng.next_below(50)));
    }
    const auto dim = 1 + rng.next_below(40);
    const auto s = rng.next();
    const auto got = fallback_encode(seq(toks), dim, s);
    const auto want = ref_fallback(toks, dim, s);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t j = 0; j < dim; ++j) EXPECT_NEAR(got[j], want[j], 1e-15);
  }
}

TEST(Fallback, EmptyDeterministicAndSeedSensitive) {
  EXPECT_EQ(fallback_encode(seq({}), 5, 1), DenseVector(5, 0.0));
  EXPECT_EQ(fallback_encode(seq({"x", "y"}), 16, 3), fallback_encode(seq({"x", "y"}), 16, 3));
  int changed = 0;
  for (int i = 0; i < 100; ++i) {
    const auto t = seq({"tok" + std::to_string(i)});
    if (fallback_encode(t, 16, 1) != fallback_encode(t, 16, 2)) ++changed;
  }
  EXPECT_GT(changed, 50);
}

TEST(Embeddings, BinaryRoundTrip) {
  TempDir dir;
  EmbeddingTable table;
  table.dim = 4;
  table.add("d1", {0.1, -2.5, 3.0, 1e-3});
  table.add("d2", {0, 0, 0, 7.25});
  save_embeddings(table, dir / "e.emb");
  const auto back = load_embeddings(dir / "e.emb");
  EXPECT_EQ(back.dim, 4u);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.ids, table.ids);
  for (const auto& id : table.ids) {
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_EQ(back.find(id)->at(j), static_cast<double>(static_cast<float>(table.find(id)->at(j))));
    }
  }
  EXPECT_EQ(back.find("nope"), nullptr);
}

TEST(Embeddings, BinaryLayoutIsLittleEndian) {
  TempDir dir;
  EmbeddingTable table;
  table.dim = 1;
  table.add("ab", {1.0});
  save_embeddings(table, dir / "e.emb");
  const auto bytes = countfuse::testing::read_file(dir / "e.emb");
  const std::string expected = std::string("EMB1") + std::string("\x01\x00\x00\x00", 4) +
                               std::string("\x01\x00\x00\x00\x00\x00\x00\x00", 8) +
                               std::string("\x02\x00", 2) + "ab" +
                               std::string("\x00\x00\x80\x3f", 4);
  EXPECT_EQ(bytes, expected);
}

TEST(Embeddings, ErrorCases) {
  TempDir dir;
  EXPECT_EQ(error_kind([&] { load_embeddings(dir / "missing.emb"); }), ErrorKind::MissingFile);
  const auto bad = dir.write("bad.emb", "EMB2\x01\x00\x00\x00");
  EXPECT_EQ(error_kind([&] { load_embeddings(bad); }), ErrorKind::BadMagic);

  EmbeddingTable table;
  table.dim = 4;
  table.add("d1", {1, 2, 3, 4});
  table.add("d2", {5, 6, 7, 8});
  save_embeddings(table, dir / "ok.emb");
  auto bytes = countfuse::testing::read_file(dir / "ok.emb");
  dir.write("trunc.emb", bytes.substr(0, bytes.size() - 3));
  EXPECT_EQ(error_kind([&] { load_embeddings(dir / "trunc.emb"); }), ErrorKind::TruncatedFile);
  dir.write("trailing.emb", bytes + "x");
  EXPECT_EQ(error_kind([&] { load_embeddings(dir / "trailing.emb"); }),
            ErrorKind::CorruptPayload);

  EXPECT_EQ(error_kind([&] { table.add("d3", {1, 2, 3}); }), ErrorKind::DimMismatch);
  EXPECT_EQ(error_kind([&] { table.add("d1", {1, 2, 3, 4}); }), ErrorKind::DuplicateId);

  const auto tsv = dir.write("e.tsv", "d1\t1,2,3,4\nd2\t0.5,0.25,0,1\n");
  const auto t = load_embeddings(tsv);
  EXPECT_EQ(t.dim, 4u);
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(*t.find("d2"), (DenseVector{0.5, 0.25, 0, 1}));
  const auto short_row = dir.write("short.tsv", "d1\t1,2,3,4\nd2\t1,2,3\n");
  EXPECT_EQ(error_kind([&] { load_embeddings(short_row); }), ErrorKind::DimMismatch);
  const auto dup = dir.write("dup.tsv", "d1\t1,2\nd1\t3,4\n");
  EXPECT_EQ(error_kind([&] { load_embeddings(dup); }), ErrorKind::DuplicateId);
}

TEST(Fuse, SpecExamples) {
  const DenseVector dense = {0.3, -1.7};
  const auto id = Standardizer::identity(2);
  SparseVector sparse;
  sparse.dim = 3;
  sparse.entries = {{1, 1.0}};
  const std::vector<double> extra = {1, 2};
  const auto fv = fuse(dense, sparse, extra, id);
  EXPECT_EQ(fv.dense, dense);
  EXPECT_EQ(fv.layout.total(), 7u);
  EXPECT_NEAR(fv.extra[0], 0.6931471805599453, 1e-15);
  EXPECT_NEAR(fv.extra[1], 1.0986122886681098, 1e-15);
  const std::vector<double> flat = {0.3, -1.7, 0, 1.0, 0, std::log(2.0), std::log(3.0)};
  const auto got = fv.to_dense();
  ASSERT_EQ(got.size(), flat.size());
  for (std::size_t j = 0; j < flat.size(); ++j) EXPECT_NEAR(got[j], flat[j], 1e-15);
  EXPECT_EQ(error_kind([&] { fuse(dense, sparse, extra, Standardizer::identity(3)); }),
            ErrorKind::DimMismatch);
}

TEST(Fuse, StandardizerUsesPopulationStdAndSkipsConstantDims) {
  const std::vector<DenseVector> rows = {{1, 5}, {3, 5}};
  const auto st = Standardizer::fit(rows, 2);
  EXPECT_DOUBLE_EQ(st.mean[0], 2.0);
  EXPECT_DOUBLE_EQ(st.std[0], 1.0);
  EXPECT_DOUBLE_EQ(st.std[1], 0.0);
  const auto fv = fuse({3, 5}, SparseVector{{}, 0}, {}, st);
  EXPECT_DOUBLE_EQ(fv.dense[0], 1.0);
  EXPECT_DOUBLE_EQ(fv.dense[1], 5.0);
}

TEST(Fuse, SlicingByLayoutRecoversParts) {
  SplitMix64 rng(21);
  for (int round = 0; round < 100; ++round) {
    const auto dd = rng.next_below(5), sd = 1 + rng.next_below(6), ed = rng.next_below(3);
    DenseVector dense(dd);
    for (auto& x : dense) x = rng.next_unit() * 4 - 2;
    Standardizer st = Standardizer::identity(dd);
    for (std::size_t j = 0; j < dd; ++j) {
      st.mean[j] = rng.next_unit();
      st.std[j] = 0.5 + rng.next_unit();
    }
    SparseVector sparse;
    sparse.dim = sd;
    for (std::uint32_t j = 0; j < sd; ++j) {
      if (rng.next_below(2)) sparse.entries.push_back({j, rng.next_unit() + 0.1});
    }
    std::vector<double> extra(ed);
    for (auto& x : extra) x = static_cast<double>(rng.next_below(5));
    const auto fv = fuse(dense, sparse, extra, st);
    const auto flat = fv.to_dense();
    ASSERT_EQ(flat.size(), dd + sd + ed);
    for (std::size_t j = 0; j < dd; ++j) {
      EXPECT_EQ(flat[j], (dense[j] - st.mean[j]) / st.std[j]);
    }
    std::vector<double> sp(sd, 0.0);
    for (const auto& e : sparse.entries) sp[e.index] = e.value;
    for (std::size_t j = 0; j < sd; ++j) EXPECT_EQ(flat[dd + j], sp[j]);
    for (std::size_t j = 0; j < ed; ++j) EXPECT_EQ(flat[dd + sd + j], std::log1p(extra[j]));
  }
}
