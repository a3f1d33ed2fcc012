#include "countfuse/eval.hpp"

#include <cstdio>
#include <sstream>

#include "countfuse/error.hpp"

namespace countfuse {
namespace {

int label_index(const std::string& label, const LabelPair& labels) {
  if (label == labels.positive) return kPositive;
  if (label == labels.negative) return kNegative;
  throw Error(ErrorKind::UnknownLabel, "label '" + label + "' is not one of " +
                                           labels.positive + "/" + labels.negative);
}

void check_index(int label) {
  if (label != kNegative && label != kPositive) {
    throw Error(ErrorKind::UnknownLabel, "class index " + std::to_string(label));
  }
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::size_t ConfusionMatrix::total() const {
  return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
}

ConfusionMatrix confusion(std::span<const std::string> golds,
                          std::span<const std::string> preds, const LabelPair& labels) {
  if (golds.size() != preds.size()) {
    throw Error(ErrorKind::LengthMismatch, std::to_string(golds.size()) + " golds vs " +
                                               std::to_string(preds.size()) + " predictions");
  }
  ConfusionMatrix cm;
  cm.labels = labels;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    ++cm.counts[label_index(golds[i], labels)][label_index(preds[i], labels)];
  }
  return cm;
}

ConfusionMatrix confusion(std::span<const int> golds, std::span<const int> preds,
                          const LabelPair& labels) {
  if (golds.size() != preds.size()) {
    throw Error(ErrorKind::LengthMismatch, std::to_string(golds.size()) + " golds vs " +
                                               std::to_string(preds.size()) + " predictions");
  }
  ConfusionMatrix cm;
  cm.labels = labels;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    check_index(golds[i]);
    check_index(preds[i]);
    ++cm.counts[golds[i]][preds[i]];
  }
  return cm;
}

EvalReport metrics(const ConfusionMatrix& cm) {
  EvalReport r;
  r.labels = cm.labels;
  r.matrix = cm;
  for (int c : {kNegative, kPositive}) {
    const int o = 1 - c;
    const std::size_t tp = cm.counts[c][c];
    const std::size_t fp = cm.counts[o][c];
    const std::size_t fn = cm.counts[c][o];
    auto& m = r.per_class[c];
    m.precision = ratio(tp, tp + fp);
    m.recall = ratio(tp, tp + fn);
    m.f1 = m.precision + m.recall == 0.0
               ? 0.0
               : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    m.support = tp + fn;
  }
  r.macro_f1 = (r.per_class[0].f1 + r.per_class[1].f1) / 2.0;
  r.accuracy = ratio(cm.tp() + cm.tn(), cm.total());
  return r;
}

EvalReport baseline_all(const std::string& label, std::span<const std::string> golds,
                        const LabelPair& labels) {
  const int idx = label_index(label, labels);
  std::vector<int> g;
  g.reserve(golds.size());
  for (const auto& s : golds) g.push_back(label_index(s, labels));
  return baseline_all(idx, g, labels);
}

EvalReport baseline_all(int label, std::span<const int> golds, const LabelPair& labels) {
  check_index(label);
  if (golds.empty()) throw Error(ErrorKind::EmptyGolds, "baseline needs at least one gold label");
  const std::vector<int> preds(golds.size(), label);
  return metrics(confusion(golds, preds, labels));
}

std::string format_metric(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", value);
  return buf;
}

std::string to_key_value(const EvalReport& r) {
  std::ostringstream out;
  out << "examples=" << r.matrix.total() << '\n';
  out << "accuracy=" << format_metric(r.accuracy) << '\n';
  out << "macro_f1=" << format_metric(r.macro_f1) << '\n';
  for (int c : {kPositive, kNegative}) {
    const auto& name = c == kPositive ? r.labels.positive : r.labels.negative;
    const auto& m = r.per_class[c];
    out << name << ".precision=" << format_metric(m.precision) << '\n';
    out << name << ".recall=" << format_metric(m.recall) << '\n';
    out << name << ".f1=" << format_metric(m.f1) << '\n';
    out << name << ".support=" << m.support << '\n';
  }
  out << "confusion.tp=" << r.matrix.tp() << '\n';
  out << "confusion.fp=" << r.matrix.fp() << '\n';
  out << "confusion.fn=" << r.matrix.fn() << '\n';
  out << "confusion.tn=" << r.matrix.tn() << '\n';
  return out.str();
}

std::string tsv_header() {
  return "name\tpos_precision\tpos_recall\tpos_f1\tneg_precision\tneg_recall\tneg_f1\t"
         "macro_f1\taccuracy\texamples";
}

std::string to_tsv_row(const std::string& name, const EvalReport& r) {
  std::ostringstream out;
  out << name;
  for (int c : {kPositive, kNegative}) {
    const auto& m = r.per_class[c];
    out << '\t' << format_metric(m.precision) << '\t' << format_metric(m.recall) << '\t'
        << format_metric(m.f1);
  }
  out << '\t' << format_metric(r.macro_f1) << '\t' << format_metric(r.accuracy) << '\t'
      << r.matrix.total();
  return out.str();
}

}  // namespace countfuse
