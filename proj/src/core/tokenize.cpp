#include "termharm/tokenize.hpp"

#include <algorithm>
#include <array>

#include "text_util.hpp"

namespace termharm {

namespace {

enum class CharClass { Word, Hyphen, Separator };

struct Decoded {
  char32_t code;
  std::size_t length;
};

Decoded decode_utf8(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> unsigned {
    if (i + k >= s.size()) return 0x80;
    return static_cast<unsigned char>(s[i + k]);
  };
  if (b0 < 0x80) return {b0, 1};
  if ((b0 & 0xE0) == 0xC0) return {((b0 & 0x1Fu) << 6) | (cont(1) & 0x3Fu), 2};
  if ((b0 & 0xF0) == 0xE0)
    return {((b0 & 0x0Fu) << 12) | ((cont(1) & 0x3Fu) << 6) | (cont(2) & 0x3Fu), 3};
  if ((b0 & 0xF8) == 0xF0)
    return {((b0 & 0x07u) << 18) | ((cont(1) & 0x3Fu) << 12) | ((cont(2) & 0x3Fu) << 6) |
                (cont(3) & 0x3Fu),
            4};
  return {0xFFFD, 1};  // stray continuation byte: keep as part of a word
}

CharClass classify(char32_t c) {
  if (c == '-') return CharClass::Hyphen;
  if (c < 0x80) {
    const bool alnum = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    return alnum ? CharClass::Word : CharClass::Separator;
  }
  // Latin-1 punctuation and symbols, except the letter-like ones.
  if (c >= 0xA0 && c <= 0xBF && c != 0xAA && c != 0xB5 && c != 0xBA) return CharClass::Separator;
  if (c == 0xD7 || c == 0xF7) return CharClass::Separator;
  // General punctuation block (dashes, quotes, ellipsis, ...).
  if (c >= 0x2000 && c <= 0x206F) return CharClass::Separator;
  if (c == 0x3000 || c == 0xFEFF) return CharClass::Separator;
  return CharClass::Word;
}

constexpr std::array<std::string_view, 60> kStopwords = {
    "a",     "about", "all",   "an",    "and",   "any",   "are",   "as",    "at",    "be",
    "been",  "being", "but",   "by",    "can",   "could", "do",    "does",  "each",  "for",
    "from",  "has",   "have",  "if",    "in",    "into",  "is",    "it",    "its",   "may",
    "more",  "no",    "not",   "of",    "on",    "one",   "only",  "or",    "other", "same",
    "shall", "should", "so",   "some",  "such",  "than",  "that",  "the",   "their", "them",
    "there", "these", "they",  "this",  "to",    "used",  "was",   "which", "with",  "within",
};

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  struct Piece {
    CharClass cls;
    std::size_t begin;
    std::size_t end;
  };
  std::vector<Piece> pieces;
  for (std::size_t i = 0; i < text.size();) {
    const auto d = decode_utf8(text, i);
    const std::size_t len = std::min(d.length, text.size() - i);
    pieces.push_back({classify(d.code), i, i + len});
    i += len;
  }

  std::vector<std::string> tokens;
  std::string current;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    const auto& p = pieces[k];
    bool keep = p.cls == CharClass::Word;
    if (p.cls == CharClass::Hyphen) {
      keep = !current.empty() && k + 1 < pieces.size() && pieces[k + 1].cls == CharClass::Word;
    }
    if (keep) {
      current.append(text.substr(p.begin, p.end - p.begin));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string_view to_string(TokenInput input) {
  switch (input) {
    case TokenInput::Entries: return "entries";
    case TokenInput::Terms: return "terms";
    case TokenInput::Definitions: return "definitions";
  }
  return "entries";
}

std::optional<TokenInput> parse_token_input(std::string_view name) {
  if (name == "entries") return TokenInput::Entries;
  if (name == "terms") return TokenInput::Terms;
  if (name == "definitions") return TokenInput::Definitions;
  return std::nullopt;
}

bool is_stopword(std::string_view token) {
  const auto lower = detail::ascii_lower(token);
  return std::find(kStopwords.begin(), kStopwords.end(), lower) != kStopwords.end();
}

std::vector<std::string> entry_token_bag(const TerminologicalEntry& entry, TokenInput input,
                                         bool drop_stopwords) {
  std::vector<std::string> bag;
  auto append = [&](std::string_view text) {
    for (auto& t : tokenize(text))
      if (!drop_stopwords || !is_stopword(t)) bag.push_back(std::move(t));
  };
  if (input != TokenInput::Definitions)
    for (const auto& term : entry.terms) append(term);
  if (input != TokenInput::Terms) append(entry.definition);
  return bag;
}

}  // namespace termharm
