#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace countfuse {

struct TokenSequence {
  std::vector<std::string> tokens;
  /// Number of whitespace-delimited chunks in the raw text.
  std::size_t original_len = 0;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
};

inline constexpr std::string_view kUrlToken = "<url>";
inline constexpr std::string_view kUserToken = "<user>";

/// Tweet-aware tokenizer.
///
/// The text is lowercased (ASCII only) and any code point repeated more than
/// three times in a row is squeezed to three. Each whitespace chunk is then
/// scanned left to right:
///   - "<url>" / "<user>" literals stay as they are;
///   - http://, https:// or www. starts a URL that runs to the end of the
///     chunk and becomes "<url>";
///   - '@' followed by [a-z0-9_] becomes "<user>";
///   - '#' followed by [a-z0-9_] is kept as "#tag";
///   - words are runs of letters/digits/'_' (including non-ASCII letters)
///     with single internal apostrophes or hyphens ("don't", "e-mail");
///   - runs of emoji/pictographic symbols form one token;
///   - runs of remaining punctuation form one token, stopping before
///     anything that starts one of the tokens above.
TokenSequence tokenize_tweet(std::string_view text);

/// Porter (1980) stemmer on lowercase ASCII words. Tokens that start with
/// '<', '#' or '@', contain a digit, contain anything outside a-z, or are
/// shorter than three characters are returned unchanged.
std::string stem(std::string_view token);

TokenSequence stem_all(const TokenSequence& tokens);

struct NounCounts {
  std::size_t nns = 0;
  std::size_t prp = 0;

  bool operator==(const NounCounts&) const = default;
};

using TaggedTokens = std::vector<std::pair<std::string, std::string>>;

/// id -> (token, Penn Treebank tag) rows, as produced by an external tagger.
struct PosSidecar {
  std::map<std::string, TaggedTokens, std::less<>> entries;
};

/// Reads `doc_id<TAB>token<TAB>tag` rows. Rows for one id must be contiguous;
/// tags must be Penn Treebank tags.
PosSidecar load_pos_sidecar(const std::filesystem::path& path);
void write_pos_sidecar(const PosSidecar& sidecar, const std::filesystem::path& path);

bool is_penn_treebank_tag(std::string_view tag);

/// Where noun/pronoun tags come from: a tagger sidecar file, or (when null)
/// the builtin closed-class pronoun lexicon plus plural suffix rule.
struct PosSource {
  const PosSidecar* sidecar = nullptr;

  static PosSource builtin() { return {}; }
  static PosSource from_sidecar(const PosSidecar& s) { return {&s}; }
};

bool is_builtin_pronoun(std::string_view token);
/// Length >= 4, ends in 's' but not "ss"/"us"/"is", ASCII letters only, not a
/// pronoun.
bool is_builtin_plural_noun(std::string_view token);

/// Counts NNS and PRP tags for a document. Runs on unstemmed tokens.
/// Throws Error{MissingSidecarEntry} if the sidecar has no rows for `doc_id`.
NounCounts noun_counts(std::string_view doc_id, const TokenSequence& tokens,
                       const PosSource& source);

}  // namespace countfuse
