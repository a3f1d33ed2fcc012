#include "countfuse/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "countfuse/corpus.hpp"
#include "countfuse/error.hpp"
#include "countfuse/eval.hpp"
#include "countfuse/model.hpp"
#include "countfuse/pipeline.hpp"
#include "countfuse/stats.hpp"
#include "text_util.hpp"

namespace countfuse::cli {
namespace fs = std::filesystem;
namespace {

// Raised for configuration problems detected before any work starts.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataOptions {
  std::string format = "olid-tsv";
  std::string labels = "OFF,NOT";
  std::string label_column = "a";
  std::string skip_label;

  LabelPair label_pair() const {
    const auto parts = detail::split(labels, ',');
    if (parts.size() != 2 || parts[0].empty() || parts[1].empty() || parts[0] == parts[1]) {
      throw UsageError("--labels must name two distinct classes, positive first (e.g. OFF,NOT)");
    }
    return {parts[0], parts[1]};
  }

  Dataset load(const std::string& path) const {
    LoadOptions opts;
    opts.olid_label_column = label_column == "b" ? 1 : 0;
    opts.skip_label = skip_label;
    return load_dataset(path, parse_dataset_format(format), label_pair(), opts);
  }

  void add_to(CLI::App& app) {
    app.add_option("--format", format, "Dataset format")
        ->check(CLI::IsMember({"olid-tsv", "two-column-tsv"}))
        ->capture_default_str();
    app.add_option("--labels", labels, "Label pair, positive first")->capture_default_str();
    app.add_option("--label-column", label_column, "olid-tsv label column: a or b")
        ->check(CLI::IsMember({"a", "b"}))
        ->capture_default_str();
    app.add_option("--skip-label", skip_label, "Drop rows carrying this label (e.g. NULL)");
  }

  void echo(std::ostream& m) const {
    m << "format=" << format << '\n'
      << "labels=" << labels << '\n'
      << "label-column=" << label_column << '\n';
    if (!skip_label.empty()) m << "skip-label=" << skip_label << '\n';
  }
};

struct FeatureOptions {
  bool tfidf = true;
  std::size_t vocab_cap = kDefaultVocabularyCap;
  std::string dense = "fallback";
  std::size_t dense_dim = 64;
  std::uint64_t dense_seed = 0;
  std::string embeddings;
  bool noun_counts = false;
  std::string pos_sidecar;

  CLI::Option* tfidf_opt = nullptr;
  CLI::Option* dense_opt = nullptr;
  CLI::Option* noun_opt = nullptr;

  // Loaded lazily from the paths above.
  std::optional<EmbeddingTable> embedding_table;
  std::optional<PosSidecar> sidecar;

  void add_to(CLI::App& app, bool fitting) {
    tfidf_opt = app.add_flag("--tfidf,!--no-tfidf", tfidf, "TF-IDF feature block");
    dense_opt = app.add_option("--dense", dense, "Dense block: none, fallback or embeddings")
                    ->check(CLI::IsMember({"none", "fallback", "embeddings"}));
    noun_opt = app.add_flag("--noun-counts,!--no-noun-counts", noun_counts,
                            "NNS/PRP count features");
    app.add_option("--embeddings", embeddings, "Embedding file (EMB1 or .tsv)");
    app.add_option("--pos-sidecar", pos_sidecar, "POS tag sidecar TSV");
    if (fitting) {
      dense_opt->capture_default_str();
      app.add_option("--vocab-cap", vocab_cap, "Vocabulary size cap")->capture_default_str();
      app.add_option("--dense-dim", dense_dim, "Fallback encoder width")->capture_default_str();
      app.add_option("--dense-seed", dense_seed, "Fallback encoder seed")->capture_default_str();
    }
  }

  FeatureConfig config() const {
    FeatureConfig c;
    c.tfidf = tfidf;
    c.vocab_cap = vocab_cap;
    c.dense = parse_dense_source(dense);
    c.fallback_dim = dense_dim;
    c.fallback_seed = dense_seed;
    c.noun_counts = noun_counts;
    return c;
  }

  void validate() const {
    if (!config().any_enabled()) {
      throw UsageError("no feature source enabled: enable --tfidf, --dense or --noun-counts");
    }
    if (dense == "embeddings" && embeddings.empty()) {
      throw UsageError("--dense embeddings requires --embeddings <file>");
    }
    if (vocab_cap == 0) throw UsageError("--vocab-cap must be >= 1");
    if (dense == "fallback" && dense_dim == 0) throw UsageError("--dense-dim must be >= 1");
    for (const auto* p : {&embeddings, &pos_sidecar}) {
      if (!p->empty() && !fs::exists(*p)) throw UsageError("file not found: " + *p);
    }
  }

  FeatureInputs inputs() {
    if (dense == "embeddings" && !embedding_table) embedding_table = load_embeddings(embeddings);
    if (noun_counts && !pos_sidecar.empty() && !sidecar) sidecar = load_pos_sidecar(pos_sidecar);
    return {embedding_table ? &*embedding_table : nullptr, sidecar ? &*sidecar : nullptr};
  }

  void echo(std::ostream& m) const {
    m << "tfidf=" << (tfidf ? "true" : "false") << '\n'
      << "vocab-cap=" << vocab_cap << '\n'
      << "dense=" << dense << '\n'
      << "dense-dim=" << dense_dim << '\n'
      << "dense-seed=" << dense_seed << '\n'
      << "noun-counts=" << (noun_counts ? "true" : "false") << '\n';
    if (!embeddings.empty()) m << "embeddings=" << embeddings << '\n';
    if (!pos_sidecar.empty()) m << "pos-sidecar=" << pos_sidecar << '\n';
  }
};

struct TrainOptions {
  std::string profile = "taskB";
  std::optional<double> lr;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> epochs;
  std::uint64_t seed = 1;
  std::string weights = "1:1";
  double threshold = 0.5;

  void add_to(CLI::App& app) {
    app.add_option("--profile", profile, "Hyperparameter profile: taskA or taskB")
        ->check(CLI::IsMember({"taskA", "taskB"}))
        ->capture_default_str();
    app.add_option("--lr", lr, "Learning rate (overrides profile)");
    app.add_option("--batch-size", batch_size, "Mini-batch size (overrides profile)");
    app.add_option("--epochs", epochs, "Epochs (overrides profile)");
    app.add_option("--seed", seed, "Training seed")->capture_default_str();
    app.add_option("--weights", weights, "Class weights positive:negative")
        ->capture_default_str();
    app.add_option("--threshold", threshold, "Positive-class decision threshold")
        ->capture_default_str();
  }

  TrainConfig config() const {
    TrainConfig c = profile == "taskA" ? TrainConfig::task_a() : TrainConfig::task_b();
    if (lr) c.learning_rate = *lr;
    if (batch_size) c.batch_size = *batch_size;
    if (epochs) c.epochs = *epochs;
    c.seed = seed;
    c.class_weights = parse_class_weights(weights);
    c.threshold = threshold;
    try {
      c.validate();
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    return c;
  }

  void echo(std::ostream& m) const {
    const auto c = config();
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", c.learning_rate);
    m << "profile=" << profile << '\n'
      << "lr=" << buf << '\n'
      << "batch-size=" << c.batch_size << '\n'
      << "epochs=" << c.epochs << '\n'
      << "seed=" << seed << '\n'
      << "weights=" << weights << '\n';
    std::snprintf(buf, sizeof buf, "%.17g", threshold);
    m << "threshold=" << buf << '\n';
  }
};

struct SplitOptions {
  std::string ratio = "4:1";
  std::optional<std::uint64_t> split_seed;

  void add_to(CLI::App& app) {
    app.add_option("--ratio", ratio, "train:dev split ratio")->capture_default_str();
    app.add_option("--split-seed", split_seed, "Split seed (defaults to --seed, else 1)");
  }
  std::uint64_t seed_or(std::uint64_t fallback) const { return split_seed.value_or(fallback); }
};

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string(what) + " is required");
  if (!fs::exists(path)) throw UsageError(std::string(what) + " not found: " + path);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", fraction * 100.0);
  return buf;
}

void print_distribution(std::ostream& out, const std::string& name, const Dataset& ds) {
  const auto report = class_distribution(ds);
  out << "[" << name << "] total=" << report.total << '\n';
  for (const auto* label : {&report.labels.positive, &report.labels.negative}) {
    const auto& share = report.per_class.at(*label);
    out << "  " << *label << ": " << share.count << " (" << percent(share.fraction) << ")\n";
  }
  if (const auto empty = ds.empty_text_count(); empty > 0) {
    out << "  warning: " << empty << " document(s) with empty text\n";
  }
}

std::string history_tsv(const TrainHistory& history) {
  std::ostringstream out;
  out << "epoch\tsteps\tmean_weighted_loss\ttrain_macro_f1\tdev_macro_f1\tbest\n";
  for (std::size_t e = 0; e < history.epochs.size(); ++e) {
    const auto& r = history.epochs[e];
    char loss[40];
    std::snprintf(loss, sizeof loss, "%.10g", r.mean_loss);
    out << e + 1 << '\t' << r.steps << '\t' << loss << '\t' << format_metric(r.train_macro_f1)
        << '\t' << (r.has_dev ? format_metric(r.dev_macro_f1) : "NA") << '\t'
        << (e == history.best_epoch ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string report_table(const EvalReport& model, const std::vector<int>& golds) {
  std::ostringstream out;
  out << tsv_header() << '\n' << to_tsv_row("model", model) << '\n';
  if (!golds.empty()) {
    out << to_tsv_row("all-" + model.labels.positive,
                      baseline_all(kPositive, golds, model.labels))
        << '\n';
    out << to_tsv_row("all-" + model.labels.negative,
                      baseline_all(kNegative, golds, model.labels))
        << '\n';
  }
  return out.str();
}

// Train and dev sets, either from two files or a seeded split of one.
struct TrainDev {
  Dataset train;
  Dataset dev;
  bool was_split = false;
};

TrainDev load_train_dev(const std::string& train_path, const std::string& dev_path,
                        const DataOptions& data, const SplitOptions& split,
                        std::uint64_t default_seed) {
  TrainDev td;
  Dataset full = data.load(train_path);
  if (!dev_path.empty()) {
    td.train = std::move(full);
    td.dev = data.load(dev_path);
  } else {
    auto [tr, dv] = split_dataset(full, parse_split_ratio(split.ratio), split.seed_or(default_seed));
    td.train = std::move(tr);
    td.dev = std::move(dv);
    td.was_split = true;
  }
  return td;
}

// ---------------------------------------------------------------- train

struct TrainCommand {
  std::string train_path;
  std::string dev_path;
  std::string out_dir;
  DataOptions data;
  FeatureOptions features;
  TrainOptions training;
  SplitOptions split;

  void add_to(CLI::App& app) {
    app.add_option("--train", train_path, "Training dataset")->required();
    app.add_option("--dev", dev_path, "Dev dataset (default: split --train)");
    app.add_option("--out", out_dir, "Output directory")->required();
    data.add_to(app);
    features.add_to(app, true);
    training.add_to(app);
    split.add_to(app);
  }

  int run(std::ostream& out) {
    require_file(train_path, "--train");
    if (!dev_path.empty()) require_file(dev_path, "--dev");
    features.validate();
    const TrainConfig config = training.config();
    data.label_pair();

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    auto td = load_train_dev(train_path, dev_path, data, split, training.seed);
    if (td.was_split) {
      write_dataset(td.train, dir / "train_split.tsv", DatasetFormat::OlidTsv);
      write_dataset(td.dev, dir / "dev_split.tsv", DatasetFormat::OlidTsv);
    }
    print_distribution(out, "train", td.train);
    print_distribution(out, "dev", td.dev);

    const auto inputs = features.inputs();
    const auto pipeline = FeaturePipeline::fit(td.train, features.config(), inputs);
    const auto train_x = pipeline.transform(td.train, inputs);
    const auto dev_x = pipeline.transform(td.dev, inputs);
    const auto result = train(config, train_x, dev_x, td.train.labels);

    save_model(result.params, dir / "model.fdm");
    pipeline.save(dir / "features.txt");
    write_text(dir / "history.tsv", history_tsv(result.history));

    std::ostringstream manifest;
    manifest << "# countfuse train\n"
             << "train=" << train_path << '\n';
    if (!dev_path.empty()) manifest << "dev=" << dev_path << '\n';
    manifest << "out=" << out_dir << '\n';
    data.echo(manifest);
    features.echo(manifest);
    training.echo(manifest);
    if (td.was_split) {
      manifest << "ratio=" << split.ratio << '\n'
               << "split-seed=" << split.seed_or(training.seed) << '\n';
    }
    write_text(dir / "manifest.txt", manifest.str());

    const auto layout = pipeline.layout();
    out << "layout: dense=" << layout.dense_dim << " sparse=" << layout.sparse_dim
        << " extra=" << layout.extra_dim << '\n';
    out << "best epoch: " << result.history.best_epoch + 1 << " of "
        << result.history.epochs.size() << '\n';
    if (!td.dev.empty()) {
      const auto report = evaluate(result.params, dev_x, config.threshold);
      write_text(dir / "dev_report.txt", to_key_value(report));
      write_text(dir / "dev_report.tsv", report_table(report, dev_x.labels));
      out << to_key_value(report);
    }
    out << "wrote " << (dir / "model.fdm").string() << '\n';
    return kExitOk;
  }
};

// ---------------------------------------------------------------- evaluate / predict

struct ModelInputs {
  std::string model_path;
  std::string features_path;

  void add_to(CLI::App& app) {
    app.add_option("--model", model_path, "Model file (model.fdm)")->required();
    app.add_option("--features", features_path,
                   "Feature artifact (features.txt; default: next to the model)");
  }

  std::pair<ModelParams, FeaturePipeline> load(FeatureOptions& overrides) {
    require_file(model_path, "--model");
    if (features_path.empty()) {
      features_path = (fs::path(model_path).parent_path() / "features.txt").string();
    }
    require_file(features_path, "--features");
    auto params = load_model(model_path);
    auto pipeline = FeaturePipeline::load(features_path);
    const auto& base = pipeline.config();
    const bool tfidf = overrides.tfidf_opt->count() > 0 ? overrides.tfidf : base.tfidf;
    const auto dense =
        overrides.dense_opt->count() > 0 ? parse_dense_source(overrides.dense) : base.dense;
    const bool nouns = overrides.noun_opt->count() > 0 ? overrides.noun_counts : base.noun_counts;
    if (tfidf != base.tfidf || dense != base.dense || nouns != base.noun_counts) {
      pipeline = pipeline.with_switches(tfidf, dense, nouns);
    }
    overrides.tfidf = tfidf;
    overrides.dense = to_string(dense);
    overrides.noun_counts = nouns;

    const auto mismatch = describe_layout_mismatch(params.layout, pipeline.layout());
    if (!mismatch.empty()) {
      throw Error(ErrorKind::LayoutMismatch,
                  "model and feature configuration disagree:\n" + mismatch);
    }
    return {std::move(params), std::move(pipeline)};
  }
};

struct EvaluateCommand {
  ModelInputs model;
  std::string data_path;
  std::string out_path;
  double threshold = 0.5;
  DataOptions data;
  FeatureOptions features;

  void add_to(CLI::App& app) {
    model.add_to(app);
    app.add_option("--data", data_path, "Labelled dataset to score")->required();
    app.add_option("--out", out_path, "Write the report table (TSV) here");
    app.add_option("--threshold", threshold, "Positive-class decision threshold")
        ->capture_default_str();
    data.add_to(app);
    features.add_to(app, false);
  }

  int run(std::ostream& out) {
    require_file(data_path, "--data");
    if (!(threshold > 0.0 && threshold < 1.0)) throw UsageError("--threshold must be in (0, 1)");
    auto [params, pipeline] = model.load(features);
    const Dataset ds = data.load(data_path);
    if (!(params.labels == ds.labels)) {
      throw UsageError("dataset labels " + ds.labels.positive + "," + ds.labels.negative +
                       " differ from the model's " + params.labels.positive + "," +
                       params.labels.negative);
    }
    const auto x = pipeline.transform(ds, features.inputs());
    const auto report = evaluate(params, x, threshold);
    const auto table = report_table(report, x.labels);
    out << to_key_value(report) << table;
    if (!out_path.empty()) write_text(out_path, table);
    return kExitOk;
  }
};

Dataset load_unlabelled_lines(const std::string& path, const LabelPair& labels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, path);
  Dataset ds;
  ds.labels = labels;
  ds.source = path;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    detail::strip_cr(line);
    ++row;
    ds.documents.push_back({"r" + std::to_string(row), line, labels.negative});
  }
  return ds;
}

struct PredictCommand {
  ModelInputs model;
  std::string input_path;
  std::string out_path;
  std::string input_format = "text-lines";
  std::optional<double> threshold;
  DataOptions data;
  FeatureOptions features;

  void add_to(CLI::App& app) {
    model.add_to(app);
    app.add_option("--input", input_path, "Texts to label")->required();
    app.add_option("--input-format", input_format,
                   "text-lines (one text per line), olid-tsv or two-column-tsv")
        ->check(CLI::IsMember({"text-lines", "olid-tsv", "two-column-tsv"}))
        ->capture_default_str();
    app.add_option("--out", out_path, "Write predictions here instead of stdout");
    app.add_option("--threshold", threshold, "Positive-class decision threshold (default 0.5)");
    app.add_option("--labels", data.labels, "Label pair for labelled input formats");
    app.add_option("--label-column", data.label_column, "olid-tsv label column: a or b");
    features.add_to(app, false);
  }

  int run(std::ostream& out) {
    require_file(input_path, "--input");
    const double t = threshold.value_or(0.5);
    if (!(t > 0.0 && t < 1.0)) throw UsageError("--threshold must be in (0, 1)");
    auto [params, pipeline] = model.load(features);
    Dataset ds;
    if (input_format == "text-lines") {
      ds = load_unlabelled_lines(input_path, params.labels);
    } else {
      data.format = input_format;
      ds = data.load(input_path);
    }
    const auto inputs = features.inputs();
    std::ostringstream table;
    table << "id\tlabel\tp_" << params.labels.positive << '\n';
    for (const auto& doc : ds.documents) {
      const auto fv = pipeline.transform_one(doc, inputs);
      const auto p = forward(params, fv);
      const int label = p[kPositive] >= t ? kPositive : kNegative;
      char prob[32];
      std::snprintf(prob, sizeof prob, "%.6f", p[kPositive]);
      table << doc.id << '\t'
            << (label == kPositive ? params.labels.positive : params.labels.negative) << '\t'
            << prob << '\n';
    }
    if (out_path.empty()) {
      out << table.str();
    } else {
      write_text(out_path, table.str());
    }
    return kExitOk;
  }
};

// ---------------------------------------------------------------- stats

struct StatsCommand {
  std::string data_path;
  std::string dev_path;
  std::string out_dir;
  bool wilcoxon = false;
  std::size_t wilcoxon_terms = 100;
  std::string grid;
  std::string scaling;
  DataOptions data;
  FeatureOptions features;
  TrainOptions training;
  SplitOptions split;

  void add_to(CLI::App& app) {
    app.add_option("--data", data_path, "Dataset (train side)")->required();
    app.add_option("--dev", dev_path, "Dev dataset (default: split --data)");
    app.add_option("--out", out_dir, "Directory for TSV tables");
    app.add_flag("--wilcoxon", wilcoxon,
                 "Signed-rank test on train vs dev document-frequency rates");
    app.add_option("--wilcoxon-terms", wilcoxon_terms, "Number of shared top terms compared")
        ->capture_default_str();
    app.add_option("--grid", grid, "Class-weight grid, e.g. 1:1,10:1,50:1 (or 'default')");
    app.add_option("--scaling", scaling, "Training-data fractions, e.g. 0.1,0.8,1");
    data.add_to(app);
    features.add_to(app, true);
    training.add_to(app);
    split.add_to(app);
  }

  int run(std::ostream& out) {
    require_file(data_path, "--data");
    if (!dev_path.empty()) require_file(dev_path, "--dev");
    const bool trains = !grid.empty() || !scaling.empty();
    std::vector<double> fractions;
    std::vector<ClassWeights> weight_grid;
    TrainConfig config;
    if (trains) {
      features.validate();
      config = training.config();
    }
    if (!grid.empty()) weight_grid = grid == "default" ? default_weight_grid() : parse_weight_grid(grid);
    if (!scaling.empty()) {
      for (const auto& f : detail::split(scaling, ',')) {
        try {
          fractions.push_back(std::stod(f));
        } catch (const std::logic_error&) {
          throw UsageError("bad fraction '" + f + "' in --scaling");
        }
      }
    }
    if (!out_dir.empty()) fs::create_directories(out_dir);

    const Dataset full = data.load(data_path);
    print_distribution(out, "data", full);
    if (!wilcoxon && !trains) return kExitOk;

    auto td = load_train_dev(data_path, dev_path, data, split, training.seed);
    print_distribution(out, "train", td.train);
    print_distribution(out, "dev", td.dev);

    if (wilcoxon) {
      const auto pairs = document_frequency_pairs(td.train, td.dev, wilcoxon_terms);
      const auto w = wilcoxon_signed_rank(pairs);
      char p[32];
      std::snprintf(p, sizeof p, "%.6g", w.p_two_sided);
      out << "[wilcoxon] terms=" << pairs.size() << " n_effective=" << w.n_effective
          << " w_plus=" << w.w_plus << " w_minus=" << w.w_minus << " p_two_sided=" << p
          << " method=" << to_string(w.method) << '\n';
    }
    if (!trains) return kExitOk;

    const auto inputs = features.inputs();
    if (!weight_grid.empty()) {
      const auto pipeline = FeaturePipeline::fit(td.train, features.config(), inputs);
      const auto train_x = pipeline.transform(td.train, inputs);
      const auto dev_x = pipeline.transform(td.dev, inputs);
      const auto result = weight_grid_search(train_x, dev_x, weight_grid, config, td.train.labels);
      const auto table = grid_tsv(result, td.train.labels);
      out << "[grid]\n" << table;
      if (!out_dir.empty()) write_text(fs::path(out_dir) / "grid.tsv", table);
    }
    if (!fractions.empty()) {
      const auto rows = data_scaling_run(fractions, config, td.train, td.dev, features.config(),
                                         inputs, split.seed_or(training.seed));
      const auto table = scaling_tsv(rows);
      out << "[scaling]\n" << table;
      if (!out_dir.empty()) write_text(fs::path(out_dir) / "scaling.tsv", table);
    }
    return kExitOk;
  }
};

// ---------------------------------------------------------------- split

struct SplitCommand {
  std::string data_path;
  std::string out_dir;
  std::uint64_t seed = 1;
  DataOptions data;
  SplitOptions split;

  void add_to(CLI::App& app) {
    app.add_option("--data", data_path, "Dataset to split")->required();
    app.add_option("--out", out_dir, "Output directory")->required();
    app.add_option("--seed", seed, "Split seed")->capture_default_str();
    app.add_option("--ratio", split.ratio, "train:dev ratio")->capture_default_str();
    data.add_to(app);
  }

  int run(std::ostream& out) {
    require_file(data_path, "--data");
    const Dataset ds = data.load(data_path);
    auto [train, dev] = split_dataset(ds, parse_split_ratio(split.ratio), seed);
    fs::create_directories(out_dir);
    const auto fmt = parse_dataset_format(data.format);
    const std::string ext = ".tsv";
    write_dataset(train, fs::path(out_dir) / ("train" + ext), fmt);
    write_dataset(dev, fs::path(out_dir) / ("dev" + ext), fmt);
    print_distribution(out, "train", train);
    print_distribution(out, "dev", dev);
    return kExitOk;
  }
};

// Config file lines become leading `--key=value` arguments so explicit flags,
// which come later, take precedence.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file");
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config_path.empty()) return rest;
  std::ifstream in(config_path);
  if (!in) throw UsageError("config file not found: " + config_path);
  std::vector<std::string> expanded;
  if (!rest.empty()) expanded.push_back(rest.front());  // subcommand
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw UsageError(config_path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    expanded.push_back("--" + std::string(detail::trim(t.substr(0, eq))) + "=" +
                       std::string(detail::trim(t.substr(eq + 1))));
  }
  expanded.insert(expanded.end(), rest.begin() + (rest.empty() ? 0 : 1), rest.end());
  return expanded;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"TF-IDF + dense feature fusion for imbalanced text classification", "countfuse"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.add_option("--config", "Flat key=value file; explicit flags win");
  // The config flag is handled before parsing; it is declared for --help only.

  TrainCommand train_cmd;
  EvaluateCommand evaluate_cmd;
  PredictCommand predict_cmd;
  StatsCommand stats_cmd;
  SplitCommand split_cmd;
  auto* train_app = app.add_subcommand("train", "Fit features and a classifier");
  auto* evaluate_app = app.add_subcommand("evaluate", "Score a model on a labelled dataset");
  auto* predict_app = app.add_subcommand("predict", "Label new texts");
  auto* stats_app =
      app.add_subcommand("stats", "Class balance, Wilcoxon test, weight grid, data scaling");
  auto* split_app = app.add_subcommand("split", "Stratified seeded train/dev split");
  train_cmd.add_to(*train_app);
  evaluate_cmd.add_to(*evaluate_app);
  predict_cmd.add_to(*predict_app);
  stats_cmd.add_to(*stats_app);
  split_cmd.add_to(*split_app);

  try {
    auto argv = expand_config(args);
    std::reverse(argv.begin(), argv.end());
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*train_app) return train_cmd.run(out);
    if (*evaluate_app) return evaluate_cmd.run(out);
    if (*predict_app) return predict_cmd.run(out);
    if (*stats_app) return stats_cmd.run(out);
    if (*split_app) return split_cmd.run(out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace countfuse::cli
