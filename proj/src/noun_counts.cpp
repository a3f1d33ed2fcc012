#include <algorithm>
#include <array>
#include <fstream>
#include <set>

#include "countfuse/error.hpp"
#include "countfuse/preprocess.hpp"
#include "text_util.hpp"

namespace countfuse {
namespace {

constexpr std::array<std::string_view, 20> kPronouns = {
    "i",       "you",      "he",      "she",     "it",      "we",       "they",
    "me",      "him",      "her",     "us",      "them",    "myself",   "yourself",
    "himself", "herself",  "itself",  "ourselves", "yourselves", "themselves",
};

constexpr std::array<std::string_view, 45> kPennTags = {
    "CC",  "CD",  "DT",   "EX",  "FW",  "IN",  "JJ",  "JJR", "JJS", "LS",    "MD",
    "NN",  "NNS", "NNP",  "NNPS", "PDT", "POS", "PRP", "PRP$", "RB", "RBR",  "RBS",
    "RP",  "SYM", "TO",   "UH",  "VB",  "VBD", "VBG", "VBN", "VBP", "VBZ",   "WDT",
    "WP",  "WP$", "WRB",  "$",   "#",   "``",  "''",  ",",   ".",   ":",     "-LRB-",
    "-RRB-",
};

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

bool is_penn_treebank_tag(std::string_view tag) {
  return std::find(kPennTags.begin(), kPennTags.end(), tag) != kPennTags.end();
}

bool is_builtin_pronoun(std::string_view token) {
  return std::find(kPronouns.begin(), kPronouns.end(), token) != kPronouns.end();
}

bool is_builtin_plural_noun(std::string_view token) {
  if (token.size() < 4 || token.back() != 's') return false;
  if (ends_with(token, "ss") || ends_with(token, "us") || ends_with(token, "is")) return false;
  if (!std::all_of(token.begin(), token.end(),
                   [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); })) {
    return false;
  }
  return !is_builtin_pronoun(token);
}

NounCounts noun_counts(std::string_view doc_id, const TokenSequence& tokens,
                       const PosSource& source) {
  NounCounts counts;
  if (source.sidecar == nullptr) {
    for (const auto& t : tokens.tokens) {
      if (is_builtin_pronoun(t)) {
        ++counts.prp;
      } else if (is_builtin_plural_noun(t)) {
        ++counts.nns;
      }
    }
    return counts;
  }
  const auto it = source.sidecar->entries.find(doc_id);
  if (it == source.sidecar->entries.end()) {
    throw Error(ErrorKind::MissingSidecarEntry,
                "no POS tags for document '" + std::string(doc_id) + "'");
  }
  for (const auto& [token, tag] : it->second) {
    if (tag == "NNS") ++counts.nns;
    if (tag == "PRP") ++counts.prp;
  }
  return counts;
}

PosSidecar load_pos_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  PosSidecar sidecar;
  std::set<std::string, std::less<>> closed;
  std::string current;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (line.empty()) continue;
    auto cols = detail::split(line, '\t');
    if (cols.size() != 3 || cols[0].empty()) {
      throw RowError(ErrorKind::MalformedRow, line_no, line,
                     "expected doc_id<TAB>token<TAB>tag");
    }
    if (!is_penn_treebank_tag(cols[2])) {
      throw RowError(ErrorKind::MalformedRow, line_no, cols[2],
                     "'" + cols[2] + "' is not a Penn Treebank tag");
    }
    if (cols[0] != current) {
      if (closed.contains(cols[0])) {
        throw RowError(ErrorKind::MalformedRow, line_no, cols[0],
                       "rows for '" + cols[0] + "' are not contiguous");
      }
      if (!current.empty()) closed.insert(current);
      current = cols[0];
    }
    sidecar.entries[cols[0]].emplace_back(std::move(cols[1]), std::move(cols[2]));
  }
  return sidecar;
}

void write_pos_sidecar(const PosSidecar& sidecar, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  for (const auto& [id, rows] : sidecar.entries) {
    for (const auto& [token, tag] : rows) out << id << '\t' << token << '\t' << tag << '\n';
  }
}

}  // namespace countfuse
