#include "countfuse/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "countfuse/error.hpp"
#include "text_util.hpp"

namespace countfuse {
namespace {

constexpr std::string_view kArtifactHeader = "countfuse-features 1";

std::string exact(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &used);
  } catch (const std::logic_error&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw Error(ErrorKind::CorruptPayload, "bad number for " + what + ": '" + s + "'");
  }
  return x;
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  std::uint64_t x = 0;
  try {
    x = std::stoull(s, &used);
  } catch (const std::logic_error&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || s.front() == '-') {
    throw Error(ErrorKind::CorruptPayload, "bad integer for " + what + ": '" + s + "'");
  }
  return x;
}

}  // namespace

DenseSource parse_dense_source(const std::string& name) {
  if (name == "none") return DenseSource::None;
  if (name == "fallback") return DenseSource::Fallback;
  if (name == "embeddings") return DenseSource::Embeddings;
  throw Error(ErrorKind::InvalidArgument,
              "dense source must be none, fallback or embeddings, got '" + name + "'");
}

std::string to_string(DenseSource source) {
  switch (source) {
    case DenseSource::None: return "none";
    case DenseSource::Fallback: return "fallback";
    case DenseSource::Embeddings: return "embeddings";
  }
  return "none";
}

std::size_t FeaturePipeline::dense_dim() const {
  switch (config_.dense) {
    case DenseSource::None: return 0;
    case DenseSource::Fallback: return config_.fallback_dim;
    case DenseSource::Embeddings: return standardizer_.dim();
  }
  return 0;
}

FeatureLayout FeaturePipeline::layout() const {
  return {static_cast<std::uint32_t>(dense_dim()),
          static_cast<std::uint32_t>(config_.tfidf ? vocab_.size() : 0),
          static_cast<std::uint32_t>(config_.noun_counts ? 2 : 0)};
}

DenseVector FeaturePipeline::dense_for(const LabeledDocument& doc, const TokenSequence& tokens,
                                       const FeatureInputs& inputs) const {
  switch (config_.dense) {
    case DenseSource::None: return {};
    case DenseSource::Fallback:
      return fallback_encode(tokens, config_.fallback_dim, config_.fallback_seed);
    case DenseSource::Embeddings: {
      if (inputs.embeddings == nullptr) {
        throw Error(ErrorKind::InvalidArgument, "dense source 'embeddings' needs an embedding file");
      }
      const auto* v = inputs.embeddings->find(doc.id);
      if (v == nullptr) {
        throw Error(ErrorKind::MissingEmbedding, "no embedding for document '" + doc.id + "'");
      }
      return *v;
    }
  }
  return {};
}

FeaturePipeline FeaturePipeline::fit(const Dataset& train, const FeatureConfig& config,
                                     const FeatureInputs& inputs) {
  if (!config.any_enabled()) {
    throw Error(ErrorKind::InvalidArgument, "at least one feature source must be enabled");
  }
  if (config.dense == DenseSource::Fallback && config.fallback_dim == 0) {
    throw Error(ErrorKind::InvalidArgument, "fallback encoder dim must be >= 1");
  }
  FeaturePipeline p;
  p.config_ = config;

  std::vector<TokenSequence> raw;
  raw.reserve(train.size());
  for (const auto& d : train.documents) raw.push_back(tokenize_tweet(d.text));

  if (config.tfidf) {
    std::vector<TokenSequence> stemmed;
    stemmed.reserve(raw.size());
    for (const auto& t : raw) stemmed.push_back(stem_all(t));
    p.vocab_ = build_vocabulary(stemmed, config.vocab_cap);
    p.idf_ = compute_idf(stemmed, p.vocab_);
  }
  if (config.dense != DenseSource::None) {
    std::vector<DenseVector> rows;
    rows.reserve(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
      rows.push_back(p.dense_for(train.documents[i], raw[i], inputs));
    }
    const std::size_t dim = config.dense == DenseSource::Fallback
                                ? config.fallback_dim
                                : (inputs.embeddings != nullptr ? inputs.embeddings->dim : 0);
    p.standardizer_ = Standardizer::fit(rows, dim);
  }
  return p;
}

FeaturePipeline FeaturePipeline::with_switches(bool tfidf, DenseSource dense,
                                               bool noun_counts) const {
  FeaturePipeline p = *this;
  p.config_.tfidf = tfidf;
  p.config_.dense = dense;
  p.config_.noun_counts = noun_counts;
  if (dense != config_.dense) p.standardizer_ = {};
  if (!tfidf) {
    p.vocab_ = {};
    p.idf_ = {};
  }
  return p;
}

FeatureVector FeaturePipeline::transform_one(const LabeledDocument& doc,
                                             const FeatureInputs& inputs) const {
  const auto tokens = tokenize_tweet(doc.text);
  SparseVector sparse;
  if (config_.tfidf) sparse = tfidf_vector(stem_all(tokens), vocab_, idf_);
  std::vector<double> extra;
  if (config_.noun_counts) {
    const auto source =
        inputs.pos_sidecar ? PosSource::from_sidecar(*inputs.pos_sidecar) : PosSource::builtin();
    const auto counts = noun_counts(doc.id, tokens, source);
    extra = {static_cast<double>(counts.nns), static_cast<double>(counts.prp)};
  }
  return fuse(dense_for(doc, tokens, inputs), sparse, extra, standardizer_);
}

LabeledFeatures FeaturePipeline::transform(const Dataset& ds, const FeatureInputs& inputs) const {
  LabeledFeatures out;
  out.features.reserve(ds.size());
  out.labels.reserve(ds.size());
  for (const auto& d : ds.documents) {
    out.features.push_back(transform_one(d, inputs));
    out.labels.push_back(d.label == ds.labels.positive ? kPositive : kNegative);
  }
  return out;
}

void FeaturePipeline::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << kArtifactHeader << '\n';
  out << "tfidf=" << (config_.tfidf ? 1 : 0) << '\n';
  out << "vocab_cap=" << config_.vocab_cap << '\n';
  out << "dense=" << to_string(config_.dense) << '\n';
  out << "fallback_dim=" << config_.fallback_dim << '\n';
  out << "fallback_seed=" << config_.fallback_seed << '\n';
  out << "noun_counts=" << (config_.noun_counts ? 1 : 0) << '\n';
  out << "n_docs=" << idf_.n_docs << '\n';
  out << "vocab_size=" << vocab_.size() << '\n';
  out << "standardizer_dim=" << standardizer_.dim() << '\n';
  out << "[vocab]\n";
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    out << vocab_.terms()[i] << '\t' << exact(idf_.idf[i]) << '\n';
  }
  out << "[standardizer]\n";
  for (std::size_t j = 0; j < standardizer_.dim(); ++j) {
    out << exact(standardizer_.mean[j]) << '\t' << exact(standardizer_.std[j]) << '\n';
  }
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

FeaturePipeline FeaturePipeline::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  std::string line;
  if (!std::getline(in, line) || (detail::strip_cr(line), line != kArtifactHeader)) {
    throw Error(ErrorKind::BadMagic, path.string() + " is not a feature artifact file");
  }
  std::map<std::string, std::string> keys;
  while (std::getline(in, line)) {
    detail::strip_cr(line);
    if (line == "[vocab]") break;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::CorruptPayload, "bad line '" + line + "'");
    keys[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto key = [&](const std::string& k) -> const std::string& {
    const auto it = keys.find(k);
    if (it == keys.end()) throw Error(ErrorKind::CorruptPayload, "missing key '" + k + "'");
    return it->second;
  };

  FeaturePipeline p;
  p.config_.tfidf = parse_u64(key("tfidf"), "tfidf") != 0;
  p.config_.vocab_cap = parse_u64(key("vocab_cap"), "vocab_cap");
  p.config_.dense = parse_dense_source(key("dense"));
  p.config_.fallback_dim = parse_u64(key("fallback_dim"), "fallback_dim");
  p.config_.fallback_seed = parse_u64(key("fallback_seed"), "fallback_seed");
  p.config_.noun_counts = parse_u64(key("noun_counts"), "noun_counts") != 0;
  p.idf_.n_docs = parse_u64(key("n_docs"), "n_docs");
  const auto vocab_size = parse_u64(key("vocab_size"), "vocab_size");
  const auto std_dim = parse_u64(key("standardizer_dim"), "standardizer_dim");

  std::vector<std::string> terms;
  for (std::uint64_t i = 0; i < vocab_size; ++i) {
    if (!std::getline(in, line)) throw Error(ErrorKind::CorruptPayload, "vocabulary cut short");
    detail::strip_cr(line);
    const auto cols = detail::split(line, '\t');
    if (cols.size() != 2) throw Error(ErrorKind::CorruptPayload, "bad vocabulary row '" + line + "'");
    terms.push_back(cols[0]);
    p.idf_.idf.push_back(parse_double(cols[1], "idf"));
  }
  p.vocab_ = Vocabulary(std::move(terms));
  if (!std::getline(in, line) || (detail::strip_cr(line), line != "[standardizer]")) {
    throw Error(ErrorKind::CorruptPayload, "missing [standardizer] section");
  }
  for (std::uint64_t j = 0; j < std_dim; ++j) {
    if (!std::getline(in, line)) throw Error(ErrorKind::CorruptPayload, "standardizer cut short");
    detail::strip_cr(line);
    const auto cols = detail::split(line, '\t');
    if (cols.size() != 2) {
      throw Error(ErrorKind::CorruptPayload, "bad standardizer row '" + line + "'");
    }
    p.standardizer_.mean.push_back(parse_double(cols[0], "mean"));
    p.standardizer_.std.push_back(parse_double(cols[1], "std"));
  }
  return p;
}

std::string describe_layout_mismatch(const FeatureLayout& model, const FeatureLayout& features) {
  std::ostringstream out;
  auto block = [&](const char* name, const char* hint, std::uint32_t m, std::uint32_t f) {
    if (m == f) return;
    out << name << " block: model expects " << m << " column(s), features provide " << f;
    if (hint != nullptr) out << " (" << hint << ")";
    out << '\n';
  };
  block("dense", "dense source / embedding width", model.dense_dim, features.dense_dim);
  block("sparse", "TF-IDF vocabulary", model.sparse_dim, features.sparse_dim);
  block("extra", "noun-count features", model.extra_dim, features.extra_dim);
  return out.str();
}

}  // namespace countfuse
