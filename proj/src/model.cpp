#include "countfuse/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "binary_io.hpp"
#include "countfuse/error.hpp"
#include "countfuse/random.hpp"
#include "text_util.hpp"

namespace countfuse {
namespace {

constexpr double kInitRange = 0.05;
constexpr double kProbFloor = 1e-12;
constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr std::uint64_t kShuffleStream = 0xD1B54A32D192ED03ULL;
constexpr char kModelMagic[4] = {'F', 'D', 'M', '1'};

std::string describe(const FeatureLayout& l) {
  return "(dense " + std::to_string(l.dense_dim) + ", sparse " + std::to_string(l.sparse_dim) +
         ", extra " + std::to_string(l.extra_dim) + ")";
}

void check_layout(const ModelParams& params, const FeatureVector& fv) {
  if (!(params.layout == fv.layout) || fv.dense.size() != fv.layout.dense_dim ||
      fv.extra.size() != fv.layout.extra_dim) {
    throw Error(ErrorKind::DimMismatch, "feature layout " + describe(fv.layout) +
                                            " does not match model layout " +
                                            describe(params.layout));
  }
}

// x . w_cls over the three feature blocks.
double dot_row(const ModelParams& params, std::size_t cls, const FeatureVector& fv) {
  const double* row = params.weights.data() + cls * params.input_dim();
  double s = 0.0;
  for (std::size_t j = 0; j < fv.dense.size(); ++j) s += row[j] * fv.dense[j];
  const double* sparse_row = row + fv.layout.dense_dim;
  for (const auto& e : fv.sparse.entries) s += sparse_row[e.index] * e.value;
  const double* extra_row = sparse_row + fv.layout.sparse_dim;
  for (std::size_t j = 0; j < fv.extra.size(); ++j) s += extra_row[j] * fv.extra[j];
  return s;
}

// dst_row += scale * x
void axpy_row(double* dst_row, double scale, const FeatureVector& fv) {
  for (std::size_t j = 0; j < fv.dense.size(); ++j) dst_row[j] += scale * fv.dense[j];
  double* sparse_row = dst_row + fv.layout.dense_dim;
  for (const auto& e : fv.sparse.entries) sparse_row[e.index] += scale * e.value;
  double* extra_row = sparse_row + fv.layout.sparse_dim;
  for (std::size_t j = 0; j < fv.extra.size(); ++j) extra_row[j] += scale * fv.extra[j];
}

Probabilities softmax(double z0, double z1) {
  const double m = std::max(z0, z1);
  const double e0 = std::exp(z0 - m);
  const double e1 = std::exp(z1 - m);
  const double s = e0 + e1;
  return {e0 / s, e1 / s};
}

Probabilities forward_unchecked(const ModelParams& params, const FeatureVector& fv) {
  return softmax(params.bias[0] + dot_row(params, 0, fv), params.bias[1] + dot_row(params, 1, fv));
}

void check_label(int y) {
  if (y != kNegative && y != kPositive) {
    throw Error(ErrorKind::UnknownLabel, "class index " + std::to_string(y));
  }
}

// Accumulates the batch-mean gradient over `indices` into `g` (which is
// reset first) and returns the batch-mean weighted loss. Summation follows
// index order so results do not depend on anything but the inputs.
double accumulate(const ModelParams& params, std::span<const FeatureVector> features,
                  std::span<const int> labels, std::span<const std::size_t> indices,
                  const ClassWeights& cw, Gradient& g) {
  const std::size_t dim = params.input_dim();
  g.weights.assign(kNumClasses * dim, 0.0);
  g.bias = {0.0, 0.0};
  double loss = 0.0;
  for (std::size_t i : indices) {
    const auto& fv = features[i];
    const int y = labels[i];
    const auto p = forward_unchecked(params, fv);
    loss += weighted_loss(p, y, cw);
    const double w = cw[y];
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      const double delta = w * (p[c] - (static_cast<int>(c) == y ? 1.0 : 0.0));
      g.bias[c] += delta;
      axpy_row(g.weights.data() + c * dim, delta, fv);
    }
  }
  const double inv = 1.0 / static_cast<double>(indices.size());
  for (double& x : g.weights) x *= inv;
  for (double& x : g.bias) x *= inv;
  return loss * inv;
}

class AdamState {
 public:
  explicit AdamState(std::size_t n) : m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<double> params, std::span<const double> grad, double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * grad[i];
      v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * grad[i] * grad[i];
      const double m_hat = m_[i] / c1;
      const double v_hat = v_[i] / c2;
      params[i] -= lr * m_hat / (std::sqrt(v_hat) + kAdamEps);
    }
  }

 private:
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

void check_set(const ModelParams& params, const LabeledFeatures& set) {
  if (set.features.size() != set.labels.size()) {
    throw Error(ErrorKind::LengthMismatch, "features and labels differ in length");
  }
  for (std::size_t i = 0; i < set.size(); ++i) {
    check_layout(params, set.features[i]);
    check_label(set.labels[i]);
  }
}

}  // namespace

ClassWeights parse_class_weights(const std::string& text) {
  const auto parts = detail::split(text, ':');
  ClassWeights cw;
  try {
    if (parts.size() != 2) throw std::invalid_argument(text);
    std::size_t used_a = 0;
    std::size_t used_b = 0;
    cw.positive = std::stod(parts[0], &used_a);
    cw.negative = std::stod(parts[1], &used_b);
    if (used_a != parts[0].size() || used_b != parts[1].size()) throw std::invalid_argument(text);
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::InvalidArgument,
                "class weights must look like 10:1 (positive:negative), got '" + text + "'");
  }
  if (!(cw.positive > 0.0) || !(cw.negative > 0.0) || !std::isfinite(cw.positive) ||
      !std::isfinite(cw.negative)) {
    throw Error(ErrorKind::InvalidArgument, "class weights must be positive, got '" + text + "'");
  }
  return cw;
}

std::string to_string(const ClassWeights& cw) {
  auto fmt = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return std::string(buf);
  };
  return fmt(cw.positive) + ":" + fmt(cw.negative);
}

TrainConfig TrainConfig::task_a() {
  TrainConfig c;
  c.learning_rate = 5e-6;
  c.epochs = 2;
  return c;
}

TrainConfig TrainConfig::task_b() {
  TrainConfig c;
  c.learning_rate = 5e-5;
  c.epochs = 20;
  return c;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorKind::InvalidArgument, "learning rate must be > 0");
  }
  if (batch_size < 1) throw Error(ErrorKind::InvalidArgument, "batch size must be >= 1");
  if (epochs < 1) throw Error(ErrorKind::InvalidArgument, "epochs must be >= 1");
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "threshold must be in (0, 1)");
  }
  if (!(class_weights.positive > 0.0) || !(class_weights.negative > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "class weights must be > 0");
  }
}

ModelParams init_model(const FeatureLayout& layout, const LabelPair& labels, std::uint64_t seed) {
  if (layout.total() == 0) {
    throw Error(ErrorKind::InvalidArgument, "model input dimension must be >= 1");
  }
  ModelParams p;
  p.layout = layout;
  p.labels = labels;
  p.weights.resize(kNumClasses * layout.total());
  SplitMix64 rng(seed);
  for (double& w : p.weights) w = -kInitRange + 2.0 * kInitRange * rng.next_unit();
  return p;
}

Probabilities forward(const ModelParams& params, const FeatureVector& fv) {
  check_layout(params, fv);
  return forward_unchecked(params, fv);
}

double weighted_loss(const Probabilities& probs, int gold, const ClassWeights& cw) {
  check_label(gold);
  return cw[gold] * -std::log(std::max(probs[static_cast<std::size_t>(gold)], kProbFloor));
}

Gradient gradient(const ModelParams& params, std::span<const FeatureVector> batch,
                  std::span<const int> labels, const ClassWeights& cw) {
  if (batch.empty()) throw Error(ErrorKind::EmptyBatch, "gradient of an empty batch");
  if (batch.size() != labels.size()) {
    throw Error(ErrorKind::LengthMismatch, "batch features and labels differ in length");
  }
  for (std::size_t i = 0; i < batch.size(); ++i) {
    check_layout(params, batch[i]);
    check_label(labels[i]);
  }
  std::vector<std::size_t> idx(batch.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Gradient g;
  accumulate(params, batch, labels, idx, cw, g);
  return g;
}

double mean_weighted_loss(const ModelParams& params, std::span<const FeatureVector> batch,
                          std::span<const int> labels, const ClassWeights& cw) {
  if (batch.empty()) throw Error(ErrorKind::EmptyBatch, "loss of an empty batch");
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    loss += weighted_loss(forward(params, batch[i]), labels[i], cw);
  }
  return loss / static_cast<double>(batch.size());
}

TrainResult train(const TrainConfig& config, const LabeledFeatures& train_set,
                  const LabeledFeatures& dev_set, const LabelPair& labels) {
  config.validate();
  if (train_set.empty()) throw Error(ErrorKind::EmptyTrainSet, "training set is empty");

  TrainResult result;
  ModelParams params = init_model(train_set.features.front().layout, labels, config.seed);
  check_set(params, train_set);
  check_set(params, dev_set);

  const std::size_t n = train_set.size();
  const std::size_t dim = params.input_dim();
  AdamState weight_opt(params.weights.size());
  AdamState bias_opt(kNumClasses);
  SplitMix64 shuffle_rng(config.seed ^ kShuffleStream);
  std::vector<std::size_t> order(n);
  Gradient g;
  g.weights.reserve(kNumClasses * dim);
  double best_dev = -1.0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    fisher_yates(std::span<std::size_t>(order), shuffle_rng);

    EpochRecord rec;
    for (std::size_t begin = 0; begin < n; begin += config.batch_size) {
      const std::size_t end = std::min(n, begin + config.batch_size);
      const double loss =
          accumulate(params, train_set.features, train_set.labels,
                     std::span<const std::size_t>(order).subspan(begin, end - begin),
                     config.class_weights, g);
      if (!std::isfinite(loss)) {
        throw Error(ErrorKind::NonFiniteLoss, "loss became non-finite in epoch " +
                                                  std::to_string(epoch + 1));
      }
      weight_opt.step(params.weights, g.weights, config.learning_rate);
      bias_opt.step(params.bias, g.bias, config.learning_rate);
      ++rec.steps;
    }

    rec.mean_loss = mean_weighted_loss(params, train_set.features, train_set.labels,
                                       config.class_weights);
    if (!std::isfinite(rec.mean_loss)) {
      throw Error(ErrorKind::NonFiniteLoss, "training loss is non-finite after epoch " +
                                                std::to_string(epoch + 1));
    }
    rec.train_macro_f1 = evaluate(params, train_set, config.threshold).macro_f1;
    if (!dev_set.empty()) {
      rec.has_dev = true;
      rec.dev_macro_f1 = evaluate(params, dev_set, config.threshold).macro_f1;
      if (rec.dev_macro_f1 > best_dev) {
        best_dev = rec.dev_macro_f1;
        result.params = params;
        result.history.best_epoch = epoch;
      }
    }
    result.history.epochs.push_back(rec);
  }
  if (dev_set.empty()) {
    result.params = std::move(params);
    result.history.best_epoch = config.epochs - 1;
  }
  return result;
}

int predict(const ModelParams& params, const FeatureVector& fv, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "threshold must be in (0, 1)");
  }
  return forward(params, fv)[kPositive] >= threshold ? kPositive : kNegative;
}

std::vector<int> predict_all(const ModelParams& params, std::span<const FeatureVector> fvs,
                             double threshold) {
  std::vector<int> out;
  out.reserve(fvs.size());
  for (const auto& fv : fvs) out.push_back(predict(params, fv, threshold));
  return out;
}

EvalReport evaluate(const ModelParams& params, const LabeledFeatures& data, double threshold) {
  const auto preds = predict_all(params, data.features, threshold);
  return metrics(confusion(std::span<const int>(data.labels), preds, params.labels));
}

void save_model(const ModelParams& params, const std::filesystem::path& path) {
  if (params.weights.size() != kNumClasses * params.input_dim()) {
    throw Error(ErrorKind::DimMismatch, "weight matrix does not match the layout");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out.write(kModelMagic, 4);
  detail::write_le(out, kModelFormatVersion);
  detail::write_le(out, params.layout.dense_dim);
  detail::write_le(out, params.layout.sparse_dim);
  detail::write_le(out, params.layout.extra_dim);
  for (const auto* name : {&params.labels.negative, &params.labels.positive}) {
    detail::write_le(out, static_cast<std::uint32_t>(name->size()));
    out.write(name->data(), static_cast<std::streamsize>(name->size()));
  }
  for (double w : params.weights) detail::write_le(out, w);
  for (double b : params.bias) detail::write_le(out, b);
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

ModelParams load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  const std::string name = path.string();
  auto corrupt = [&](const std::string& what) {
    return Error(ErrorKind::CorruptPayload, name + ": " + what);
  };

  char magic[4] = {};
  if (!in.read(magic, 4) || std::memcmp(magic, kModelMagic, 4) != 0) {
    throw Error(ErrorKind::BadMagic, name + " is not an FDM1 model file");
  }
  std::uint32_t version = 0;
  if (!detail::read_le(in, version)) throw corrupt("missing version");
  if (version != kModelFormatVersion) {
    throw Error(ErrorKind::VersionMismatch, name + ": format version " + std::to_string(version) +
                                                ", expected " +
                                                std::to_string(kModelFormatVersion));
  }
  ModelParams p;
  if (!detail::read_le(in, p.layout.dense_dim) || !detail::read_le(in, p.layout.sparse_dim) ||
      !detail::read_le(in, p.layout.extra_dim)) {
    throw corrupt("truncated layout");
  }
  constexpr std::uint32_t kMaxLabelBytes = 1U << 16;
  for (auto* label : {&p.labels.negative, &p.labels.positive}) {
    std::uint32_t len = 0;
    if (!detail::read_le(in, len) || len > kMaxLabelBytes || !detail::read_bytes(in, *label, len)) {
      throw corrupt("truncated label names");
    }
  }
  if (p.input_dim() == 0) throw corrupt("empty layout");

  // Check the remaining size before allocating from an untrusted header.
  const auto here = in.tellg();
  in.seekg(0, std::ios::end);
  const auto remaining = static_cast<std::uint64_t>(in.tellg() - here);
  in.seekg(here);
  const std::uint64_t expected = (kNumClasses * p.input_dim() + kNumClasses) * sizeof(double);
  if (remaining != expected) {
    throw corrupt("payload is " + std::to_string(remaining) + " bytes, expected " +
                  std::to_string(expected));
  }
  p.weights.resize(kNumClasses * p.input_dim());
  for (double& w : p.weights) {
    if (!detail::read_le(in, w)) throw corrupt("truncated weights");
  }
  for (double& b : p.bias) {
    if (!detail::read_le(in, b)) throw corrupt("truncated bias");
  }
  const bool finite = std::all_of(p.weights.begin(), p.weights.end(),
                                  [](double x) { return std::isfinite(x); }) &&
                      std::isfinite(p.bias[0]) && std::isfinite(p.bias[1]);
  if (!finite) throw corrupt("non-finite parameter");
  return p;
}

}  // namespace countfuse
