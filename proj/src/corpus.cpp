#include "countfuse/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "countfuse/error.hpp"
#include "countfuse/random.hpp"
#include "text_util.hpp"

namespace countfuse {

std::size_t Dataset::empty_text_count() const {
  return static_cast<std::size_t>(std::count_if(
      documents.begin(), documents.end(),
      [](const LabeledDocument& d) { return d.text.empty(); }));
}

DatasetFormat parse_dataset_format(const std::string& name) {
  if (name == "olid-tsv") return DatasetFormat::OlidTsv;
  if (name == "two-column-tsv") return DatasetFormat::TwoColumnTsv;
  throw Error(ErrorKind::InvalidArgument, "unknown dataset format '" + name + "'");
}

std::string to_string(DatasetFormat format) {
  return format == DatasetFormat::OlidTsv ? "olid-tsv" : "two-column-tsv";
}

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                     const LabelPair& labels, const LoadOptions& options) {
  if (labels.positive.empty() || labels.negative.empty() ||
      labels.positive == labels.negative) {
    throw Error(ErrorKind::InvalidArgument, "label names must be distinct and non-empty");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());

  Dataset ds;
  ds.labels = labels;
  ds.source = path.string();
  std::unordered_set<std::string> seen;

  const std::size_t label_col = format == DatasetFormat::OlidTsv
                                    ? 2 + static_cast<std::size_t>(options.olid_label_column)
                                    : 1;
  std::string line;
  std::size_t line_no = 0;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (!detail::is_valid_utf8(line)) {
      throw RowError(ErrorKind::MalformedRow, line_no, line, "invalid UTF-8");
    }
    if (format == DatasetFormat::OlidTsv && line_no == 1) continue;  // header
    if (line.empty()) continue;
    ++row_no;

    const auto cols = detail::split(line, '\t');
    const std::size_t needed = format == DatasetFormat::OlidTsv ? label_col + 1 : 2;
    if (cols.size() < needed || (format == DatasetFormat::TwoColumnTsv && cols.size() != 2)) {
      throw RowError(ErrorKind::MalformedRow, line_no, line,
                     "expected " + std::to_string(needed) + " tab-separated columns, got " +
                         std::to_string(cols.size()));
    }
    LabeledDocument doc;
    if (format == DatasetFormat::OlidTsv) {
      doc.id = cols[0];
      doc.text = cols[1];
      if (doc.id.empty()) throw RowError(ErrorKind::MalformedRow, line_no, line, "empty id");
    } else {
      doc.id = "r" + std::to_string(row_no);
      doc.text = cols[0];
    }
    doc.label = cols[label_col];
    if (!options.skip_label.empty() && doc.label == options.skip_label) continue;
    if (!labels.contains(doc.label)) {
      throw RowError(ErrorKind::UnknownLabel, line_no, doc.label,
                     "label '" + doc.label + "' is not one of " + labels.positive + "/" +
                         labels.negative);
    }
    if (!seen.insert(doc.id).second) {
      throw Error(ErrorKind::DuplicateId, "duplicate id '" + doc.id + "' at line " +
                                              std::to_string(line_no));
    }
    ds.documents.push_back(std::move(doc));
  }
  return ds;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path,
                   DatasetFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  if (format == DatasetFormat::OlidTsv) out << "id\ttweet\tsubtask_a\n";
  for (const auto& d : ds.documents) {
    if (d.text.find_first_of("\t\n") != std::string::npos) {
      throw Error(ErrorKind::InvalidArgument,
                  "document '" + d.id + "' contains a tab or newline and cannot be written as TSV");
    }
    if (format == DatasetFormat::OlidTsv) {
      out << d.id << '\t' << d.text << '\t' << d.label << '\n';
    } else {
      out << d.text << '\t' << d.label << '\n';
    }
  }
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

SplitRatio parse_split_ratio(const std::string& text) {
  const auto parts = detail::split(text, ':');
  SplitRatio r;
  try {
    if (parts.size() != 2) throw std::invalid_argument(text);
    const long a = std::stol(parts[0]);
    const long b = std::stol(parts[1]);
    if (a <= 0 || b <= 0) throw std::invalid_argument(text);
    r.train = static_cast<std::uint32_t>(a);
    r.dev = static_cast<std::uint32_t>(b);
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::InvalidArgument,
                "split ratio must look like 4:1 with positive parts, got '" + text + "'");
  }
  return r;
}

namespace {

// Indices of each class's documents, sorted by id and shuffled with the shared
// stream. Positive class first.
std::array<std::vector<std::size_t>, 2> shuffled_class_members(const Dataset& ds,
                                                               std::uint64_t seed) {
  std::array<std::vector<std::size_t>, 2> members;
  for (std::size_t i = 0; i < ds.documents.size(); ++i) {
    members[ds.documents[i].label == ds.labels.positive ? 0 : 1].push_back(i);
  }
  SplitMix64 rng(seed);
  for (auto& m : members) {
    std::sort(m.begin(), m.end(), [&](std::size_t a, std::size_t b) {
      return ds.documents[a].id < ds.documents[b].id;
    });
    fisher_yates(std::span<std::size_t>(m), rng);
  }
  return members;
}

Dataset select(const Dataset& ds, const std::vector<bool>& keep, bool value) {
  Dataset out;
  out.labels = ds.labels;
  out.source = ds.source;
  for (std::size_t i = 0; i < ds.documents.size(); ++i) {
    if (keep[i] == value) out.documents.push_back(ds.documents[i]);
  }
  return out;
}

}  // namespace

std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, SplitRatio ratio,
                                          std::uint64_t seed) {
  if (ratio.train == 0 || ratio.dev == 0) {
    throw Error(ErrorKind::InvalidArgument, "split ratio parts must be positive");
  }
  if (ds.empty()) throw Error(ErrorKind::EmptyDataset, "cannot split an empty dataset");

  const auto members = shuffled_class_members(ds, seed);
  const std::array<std::string, 2> names{ds.labels.positive, ds.labels.negative};
  for (std::size_t c = 0; c < 2; ++c) {
    if (members[c].size() < 2) {
      throw Error(ErrorKind::DegenerateSplit,
                  "class '" + names[c] + "' has " + std::to_string(members[c].size()) +
                      " document(s); a train/dev split needs at least 2 per class");
    }
  }

  const double dev_share = static_cast<double>(ratio.dev) / (ratio.train + ratio.dev);
  const auto total_dev =
      static_cast<std::size_t>(std::floor(static_cast<double>(ds.size()) * dev_share + 0.5));
  std::array<std::size_t, 2> dev_count{};
  std::array<double, 2> remainder{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < 2; ++c) {
    const double ideal = static_cast<double>(members[c].size()) * dev_share;
    const auto base = static_cast<std::size_t>(std::floor(ideal));
    dev_count[c] = std::min(std::max<std::size_t>(1, base), members[c].size() - 1);
    remainder[c] = ideal - std::floor(ideal);
    assigned += dev_count[c];
  }
  // Largest remainder first; ties go to the positive class.
  std::array<std::size_t, 2> order{0, 1};
  if (remainder[1] > remainder[0]) order = {1, 0};
  for (std::size_t c : order) {
    if (assigned >= total_dev) break;
    const double ideal = static_cast<double>(members[c].size()) * dev_share;
    if (dev_count[c] < members[c].size() - 1 && static_cast<double>(dev_count[c]) < ideal) {
      ++dev_count[c];
      ++assigned;
    }
  }

  std::vector<bool> in_dev(ds.size(), false);
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t k = 0; k < dev_count[c]; ++k) in_dev[members[c][k]] = true;
  }
  return {select(ds, in_dev, false), select(ds, in_dev, true)};
}

Dataset stratified_subsample(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "subsample fraction must be in (0, 1]");
  }
  if (ds.empty()) throw Error(ErrorKind::EmptyDataset, "cannot subsample an empty dataset");
  if (fraction == 1.0) return ds;

  const auto members = shuffled_class_members(ds, seed);
  const std::array<std::string, 2> names{ds.labels.positive, ds.labels.negative};
  std::vector<bool> keep(ds.size(), false);
  for (std::size_t c = 0; c < 2; ++c) {
    const auto k = static_cast<std::size_t>(
        std::floor(static_cast<double>(members[c].size()) * fraction + 0.5));
    if (k == 0) {
      throw Error(ErrorKind::DegenerateSplit,
                  "fraction " + std::to_string(fraction) + " leaves no '" + names[c] +
                      "' documents");
    }
    for (std::size_t i = 0; i < k; ++i) keep[members[c][i]] = true;
  }
  return select(ds, keep, true);
}

ImbalanceReport class_distribution(const Dataset& ds) {
  ImbalanceReport report;
  report.labels = ds.labels;
  report.total = ds.size();
  report.per_class[ds.labels.positive] = {};
  report.per_class[ds.labels.negative] = {};
  for (const auto& d : ds.documents) ++report.per_class[d.label].count;
  for (auto& [name, share] : report.per_class) {
    share.fraction = report.total == 0
                         ? 0.0
                         : static_cast<double>(share.count) / static_cast<double>(report.total);
  }
  return report;
}

}  // namespace countfuse
