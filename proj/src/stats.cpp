#include "countfuse/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "countfuse/error.hpp"
#include "text_util.hpp"

namespace countfuse {

std::string to_string(WilcoxonMethod method) {
  return method == WilcoxonMethod::Exact ? "exact" : "normal-approx";
}

WilcoxonResult wilcoxon_signed_rank(std::span<const std::pair<double, double>> pairs) {
  std::vector<double> d;
  d.reserve(pairs.size());
  for (const auto& [a, b] : pairs) d.push_back(a - b);
  return wilcoxon_signed_rank(d);
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> differences) {
  struct Item {
    double magnitude;
    bool positive;
  };
  std::vector<Item> items;
  for (double x : differences) {
    if (!std::isfinite(x)) throw Error(ErrorKind::InvalidArgument, "non-finite difference");
    if (x != 0.0) items.push_back({std::fabs(x), x > 0.0});
  }
  if (items.empty()) {
    throw Error(ErrorKind::AllZeroDifferences, "every paired difference is zero");
  }
  std::sort(items.begin(), items.end(),
            [](const Item& a, const Item& b) { return a.magnitude < b.magnitude; });

  const std::size_t n = items.size();
  // Twice the average rank, so tied ranks stay integral.
  std::vector<std::uint64_t> rank2(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && items[j].magnitude == items[i].magnitude) ++j;
    const std::uint64_t r2 = static_cast<std::uint64_t>(i + 1 + j);  // (i+1) + j
    for (std::size_t k = i; k < j; ++k) rank2[k] = r2;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }

  WilcoxonResult r;
  r.n_effective = n;
  std::uint64_t w2_plus = 0;
  std::uint64_t total2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total2 += rank2[i];
    if (items[i].positive) w2_plus += rank2[i];
  }
  r.w_plus = static_cast<double>(w2_plus) / 2.0;
  r.w_minus = static_cast<double>(total2 - w2_plus) / 2.0;

  const double nd = static_cast<double>(n);
  if (n <= kWilcoxonExactMaxN) {
    r.method = WilcoxonMethod::Exact;
    // counts[s] = number of sign assignments whose doubled W+ equals s.
    std::vector<std::uint64_t> counts(total2 + 1, 0);
    counts[0] = 1;
    std::uint64_t reach = 0;
    for (std::size_t i = 0; i < n; ++i) {
      reach += rank2[i];
      for (std::uint64_t s = reach; s >= rank2[i]; --s) {
        counts[s] += counts[s - rank2[i]];
        if (s == rank2[i]) break;
      }
    }
    std::uint64_t le = 0;
    std::uint64_t ge = 0;
    for (std::uint64_t s = 0; s <= total2; ++s) {
      if (s <= w2_plus) le += counts[s];
      if (s >= w2_plus) ge += counts[s];
    }
    const double all = std::ldexp(1.0, static_cast<int>(n));
    r.p_two_sided =
        std::min(1.0, 2.0 * static_cast<double>(std::min(le, ge)) / all);
  } else {
    r.method = WilcoxonMethod::NormalApprox;
    const double mean = nd * (nd + 1.0) / 4.0;
    const double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0;
    const double diff = std::max(std::fabs(r.w_plus - mean) - 0.5, 0.0);
    const double z = var > 0.0 ? diff / std::sqrt(var) : 0.0;
    r.p_two_sided = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  }
  return r;
}

std::vector<std::pair<double, double>> document_frequency_pairs(const Dataset& first,
                                                                const Dataset& second,
                                                                std::size_t top_k) {
  if (first.empty() || second.empty()) {
    throw Error(ErrorKind::EmptyDataset, "document-frequency comparison needs two non-empty sets");
  }
  auto stemmed = [](const Dataset& ds) {
    std::vector<TokenSequence> out;
    out.reserve(ds.size());
    for (const auto& d : ds.documents) out.push_back(stem_all(tokenize_tweet(d.text)));
    return out;
  };
  const auto a = stemmed(first);
  const auto b = stemmed(second);
  std::vector<TokenSequence> both(a);
  both.insert(both.end(), b.begin(), b.end());
  const auto vocab = build_vocabulary(both, top_k);

  auto df_rates = [&](const std::vector<TokenSequence>& docs) {
    std::vector<double> df(vocab.size(), 0.0);
    std::unordered_set<std::ptrdiff_t> seen;
    for (const auto& doc : docs) {
      seen.clear();
      for (const auto& t : doc.tokens) {
        const auto idx = vocab.index_of(t);
        if (idx >= 0 && seen.insert(idx).second) df[static_cast<std::size_t>(idx)] += 1.0;
      }
    }
    for (double& x : df) x /= static_cast<double>(docs.size());
    return df;
  };
  const auto ra = df_rates(a);
  const auto rb = df_rates(b);
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) pairs.emplace_back(ra[i], rb[i]);
  return pairs;
}

std::vector<ClassWeights> default_weight_grid() {
  return {{1.0, 1.0}, {4.0, 1.0}, {10.0, 1.0}, {50.0, 1.0}, {100.0, 1.0}};
}

std::vector<ClassWeights> parse_weight_grid(const std::string& text) {
  std::vector<ClassWeights> grid;
  for (const auto& item : detail::split(text, ',')) {
    grid.push_back(parse_class_weights(std::string(detail::trim(item))));
  }
  if (grid.empty()) throw Error(ErrorKind::InvalidArgument, "empty weight grid");
  return grid;
}

GridSearchResult weight_grid_search(const LabeledFeatures& train, const LabeledFeatures& dev,
                                    std::span<const ClassWeights> grid,
                                    const TrainConfig& base_config, const LabelPair& labels) {
  if (grid.empty()) throw Error(ErrorKind::InvalidArgument, "weight grid is empty");
  GridSearchResult result;
  for (const auto& cw : grid) {
    TrainConfig config = base_config;
    config.class_weights = cw;
    TrainResult trained;
    try {
      trained = countfuse::train(config, train, dev, labels);
    } catch (const Error& e) {
      throw Error(e.kind(), "grid point " + to_string(cw) + ": " + e.what());
    }
    GridRow row;
    row.weights = cw;
    row.train = evaluate(trained.params, train, config.threshold);
    row.dev = dev.empty() ? EvalReport{} : evaluate(trained.params, dev, config.threshold);
    if (result.rows.empty() || row.dev.macro_f1 > result.rows[result.best].dev.macro_f1) {
      result.best = result.rows.size();
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

std::vector<ScalingRow> data_scaling_run(std::span<const double> fractions,
                                         const TrainConfig& config, const Dataset& train,
                                         const Dataset& dev, const FeatureConfig& features,
                                         const FeatureInputs& inputs,
                                         std::uint64_t subsample_seed) {
  if (fractions.empty()) throw Error(ErrorKind::InvalidArgument, "no fractions given");
  if (!std::is_sorted(fractions.begin(), fractions.end())) {
    throw Error(ErrorKind::InvalidArgument, "fractions must be sorted ascending");
  }
  std::vector<ScalingRow> rows;
  for (double f : fractions) {
    const Dataset subset = stratified_subsample(train, f, subsample_seed);
    const auto pipeline = FeaturePipeline::fit(subset, features, inputs);
    const auto train_x = pipeline.transform(subset, inputs);
    const auto dev_x = pipeline.transform(dev, inputs);
    const auto trained = countfuse::train(config, train_x, dev_x, train.labels);
    ScalingRow row;
    row.fraction = f;
    row.train_size = subset.size();
    row.train = evaluate(trained.params, train_x, config.threshold);
    row.dev = dev_x.empty() ? EvalReport{} : evaluate(trained.params, dev_x, config.threshold);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string grid_tsv(const GridSearchResult& result, const LabelPair& labels) {
  std::ostringstream out;
  const auto& p = labels.positive;
  const auto& n = labels.negative;
  out << "weight_" << p << "\tweight_" << n << "\ttrain_macro_f1\tdev_precision_" << p
      << "\tdev_recall_" << p << "\tdev_f1_" << p << "\tdev_precision_" << n << "\tdev_recall_"
      << n << "\tdev_f1_" << n << "\tdev_macro_f1\tbest\n";
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const auto& r = result.rows[i];
    char wp[32];
    char wn[32];
    std::snprintf(wp, sizeof wp, "%g", r.weights.positive);
    std::snprintf(wn, sizeof wn, "%g", r.weights.negative);
    out << wp << '\t' << wn << '\t' << format_metric(r.train.macro_f1);
    for (int c : {kPositive, kNegative}) {
      const auto& m = r.dev.per_class[c];
      out << '\t' << format_metric(m.precision) << '\t' << format_metric(m.recall) << '\t'
          << format_metric(m.f1);
    }
    out << '\t' << format_metric(r.dev.macro_f1) << '\t' << (i == result.best ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string scaling_tsv(std::span<const ScalingRow> rows) {
  std::ostringstream out;
  out << "fraction\ttrain_size\ttrain_macro_f1\tdev_macro_f1\n";
  for (const auto& r : rows) {
    char f[32];
    std::snprintf(f, sizeof f, "%g", r.fraction);
    out << f << '\t' << r.train_size << '\t' << format_metric(r.train.macro_f1) << '\t'
        << format_metric(r.dev.macro_f1) << '\n';
  }
  return out.str();
}

}  // namespace countfuse
