#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "countfuse/preprocess.hpp"
#include "text_util.hpp"

namespace countfuse {
namespace {

enum class CharClass { Space, Word, Emoji, Punct };

bool in(char32_t cp, char32_t lo, char32_t hi) { return cp >= lo && cp <= hi; }

CharClass classify(char32_t cp) {
  if (cp < 0x80) {
    if (cp == ' ' || (cp >= '\t' && cp <= '\r')) return CharClass::Space;
    if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9') ||
        cp == '_') {
      return CharClass::Word;
    }
    return CharClass::Punct;
  }
  if (cp == 0xA0 || in(cp, 0x2000, 0x200A) || cp == 0x202F || cp == 0x205F || cp == 0x3000) {
    return CharClass::Space;
  }
  if (cp == 0x200D || cp == 0x20E3 || in(cp, 0xFE00, 0xFE0F) || in(cp, 0x2190, 0x21FF) ||
      in(cp, 0x2300, 0x23FF) || in(cp, 0x25A0, 0x27BF) || in(cp, 0x2B00, 0x2BFF) ||
      in(cp, 0x1F000, 0x1FAFF) || in(cp, 0xE0020, 0xE007F)) {
    return CharClass::Emoji;
  }
  if (in(cp, 0xA1, 0xBF) || cp == 0xD7 || cp == 0xF7 || in(cp, 0x2010, 0x206F) ||
      in(cp, 0x3001, 0x303F) || cp == 0xFFFD) {
    return CharClass::Punct;
  }
  return CharClass::Word;
}

bool is_tag_char(char32_t cp) { return classify(cp) == CharClass::Word; }

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode(std::span<const char32_t> cps) {
  std::string out;
  for (char32_t cp : cps) append_utf8(out, cp);
  return out;
}

// Lowercased, squeezed code points. Invalid bytes become U+FFFD.
std::vector<char32_t> normalize(std::string_view text) {
  std::vector<char32_t> cps;
  cps.reserve(text.size());
  std::size_t run = 0;
  for (std::size_t i = 0; i < text.size();) {
    char32_t cp;
    std::size_t len = detail::decode_utf8(text, i, cp);
    if (len == 0) {
      cp = 0xFFFD;
      len = 1;
    }
    i += len;
    if (cp >= 'A' && cp <= 'Z') cp += 'a' - 'A';
    if (!cps.empty() && cps.back() == cp) {
      if (++run > 3) continue;
    } else {
      run = 1;
    }
    cps.push_back(cp);
  }
  return cps;
}

bool starts_with(std::span<const char32_t> s, std::size_t pos, std::string_view ascii) {
  if (pos + ascii.size() > s.size()) return false;
  for (std::size_t k = 0; k < ascii.size(); ++k) {
    if (s[pos + k] != static_cast<unsigned char>(ascii[k])) return false;
  }
  return true;
}

class ChunkScanner {
 public:
  ChunkScanner(std::span<const char32_t> chunk, std::vector<std::string>& out)
      : s_(chunk), out_(out) {}

  void run() {
    while (pos_ < s_.size()) {
      if (take_literal() || take_url() || take_prefixed('@') || take_prefixed('#')) continue;
      switch (classify(s_[pos_])) {
        case CharClass::Word: take_word(); break;
        case CharClass::Emoji: take_run(CharClass::Emoji); break;
        default: take_run(CharClass::Punct); break;
      }
    }
  }

 private:
  bool literal_at(std::size_t p) const {
    return starts_with(s_, p, kUrlToken) || starts_with(s_, p, kUserToken);
  }
  bool prefixed_at(std::size_t p) const {
    return (s_[p] == '@' || s_[p] == '#') && p + 1 < s_.size() && is_tag_char(s_[p + 1]);
  }

  bool take_literal() {
    for (std::string_view lit : {kUrlToken, kUserToken}) {
      if (starts_with(s_, pos_, lit)) {
        out_.emplace_back(lit);
        pos_ += lit.size();
        return true;
      }
    }
    return false;
  }

  bool take_url() {
    if (starts_with(s_, pos_, "http://") || starts_with(s_, pos_, "https://") ||
        starts_with(s_, pos_, "www.")) {
      out_.emplace_back(kUrlToken);
      pos_ = s_.size();
      return true;
    }
    return false;
  }

  bool take_prefixed(char32_t sigil) {
    if (s_[pos_] != sigil || !prefixed_at(pos_)) return false;
    const std::size_t begin = pos_++;
    while (pos_ < s_.size() && is_tag_char(s_[pos_])) ++pos_;
    if (sigil == '@') {
      out_.emplace_back(kUserToken);
    } else {
      out_.push_back(encode(s_.subspan(begin, pos_ - begin)));
    }
    return true;
  }

  void take_word() {
    const std::size_t begin = pos_;
    while (pos_ < s_.size()) {
      if (classify(s_[pos_]) == CharClass::Word) {
        ++pos_;
      } else if ((s_[pos_] == '\'' || s_[pos_] == '-') && pos_ + 1 < s_.size() &&
                 classify(s_[pos_ + 1]) == CharClass::Word) {
        pos_ += 2;
      } else {
        break;
      }
    }
    out_.push_back(encode(s_.subspan(begin, pos_ - begin)));
  }

  void take_run(CharClass cls) {
    const std::size_t begin = pos_++;
    while (pos_ < s_.size()) {
      const auto c = classify(s_[pos_]);
      const bool same = cls == CharClass::Emoji ? c == CharClass::Emoji
                                                : (c == CharClass::Punct);
      if (!same || literal_at(pos_) || prefixed_at(pos_)) break;
      ++pos_;
    }
    out_.push_back(encode(s_.subspan(begin, pos_ - begin)));
  }

  std::span<const char32_t> s_;
  std::vector<std::string>& out_;
  std::size_t pos_ = 0;
};

}  // namespace

TokenSequence tokenize_tweet(std::string_view text) {
  TokenSequence result;
  const auto cps = normalize(text);
  const std::span<const char32_t> all(cps);
  std::size_t i = 0;
  while (i < all.size()) {
    while (i < all.size() && classify(all[i]) == CharClass::Space) ++i;
    const std::size_t begin = i;
    while (i < all.size() && classify(all[i]) != CharClass::Space) ++i;
    if (i > begin) {
      ++result.original_len;
      ChunkScanner(all.subspan(begin, i - begin), result.tokens).run();
    }
  }
  return result;
}

}  // namespace countfuse
