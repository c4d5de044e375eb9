#pragma once

// Tokenization, sentence splitting, BPE subword vocabulary and rule-based
// entity tagging. Everything here is deterministic and case-preserving;
// lowercasing for matching happens in the consumers, never here.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "factsum/error.hpp"

namespace factsum::textkit {

enum class TokenKind { Word, Number, Punct };

struct Token {
  std::string text;
  std::size_t begin = 0;  // byte offsets into the source, half-open
  std::size_t end = 0;
  TokenKind kind = TokenKind::Word;
};

struct SentenceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

namespace detail {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
inline bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
// Non-ASCII bytes are treated as word characters; no Unicode tables here.
inline bool is_word_char(char c) {
  return is_upper(c) || is_lower(c) || static_cast<unsigned char>(c) >= 0x80;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (is_upper(c)) c = static_cast<char>(c - 'A' + 'a');
  return out;
}

// Splits a UTF-8 string into codepoint-sized substrings. Invalid lead bytes
// fall back to single-byte pieces.
inline std::vector<std::string> split_codepoints(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    if ((b & 0xE0) == 0xC0)
      len = 2;
    else if ((b & 0xF0) == 0xE0)
      len = 3;
    else if ((b & 0xF8) == 0xF0)
      len = 4;
    if (i + len > s.size()) len = 1;
    out.emplace_back(s.substr(i, len));
    i += len;
  }
  return out;
}

}  // namespace detail

// Closed abbreviation list; a trailing '.' of these never ends a sentence.
inline const std::set<std::string>& abbreviations() {
  static const std::set<std::string> abbr = {
      "mr.",  "mrs.", "ms.",  "dr.",  "st.",  "u.s.", "u.k.", "vs.",
      "etc.", "prof.", "jr.", "sr.",  "no.",  "gen.", "col.", "sgt.",
      "lt.",  "e.g.", "i.e.", "a.m.", "p.m.",
  };
  return abbr;
}

namespace detail {

inline bool abbreviation_ends_at(const std::string& text, std::size_t dot) {
  // Scan back over the token the dot terminates (letters and interior dots).
  std::size_t b = dot;
  while (b > 0) {
    char c = text[b - 1];
    if (is_word_char(c) || c == '.')
      --b;
    else
      break;
  }
  if (b == dot) return false;
  return abbreviations().count(lower(std::string_view(text).substr(b, dot - b + 1))) > 0;
}

}  // namespace detail

// Sentence boundaries: after {. ! ?} followed by whitespace and an uppercase
// letter, or at end of text. Abbreviations from the closed list never split.
inline std::vector<SentenceSpan> split_sentences(const std::string& text) {
  std::vector<SentenceSpan> out;
  const std::size_t n = text.size();
  std::size_t start = 0;
  while (start < n && detail::is_space(text[start])) ++start;
  if (start == n) return out;

  std::size_t i = start;
  while (i < n) {
    char c = text[i];
    if (c != '.' && c != '!' && c != '?') {
      ++i;
      continue;
    }
    std::size_t mark_end = i + 1;
    while (mark_end < n &&
           (text[mark_end] == '.' || text[mark_end] == '!' || text[mark_end] == '?'))
      ++mark_end;

    bool split = false;
    if (c == '.' && mark_end == i + 1 && detail::abbreviation_ends_at(text, i)) {
      split = false;
    } else if (mark_end == n) {
      split = true;
    } else {
      std::size_t j = mark_end;
      while (j < n && detail::is_space(text[j])) ++j;
      split = j > mark_end && (j == n || detail::is_upper(text[j]));
    }

    if (!split) {
      i = mark_end;
      continue;
    }
    out.push_back({start, mark_end});
    std::size_t j = mark_end;
    while (j < n && detail::is_space(text[j])) ++j;
    start = j;
    i = j;
  }
  if (start < n) {
    std::size_t e = n;
    while (e > start && detail::is_space(text[e - 1])) --e;
    if (e > start) out.push_back({start, e});
  }
  return out;
}

// Whitespace-separated maximal runs; punctuation becomes single-character
// PUNCT tokens; digit runs with optional internal , . become NUMBER tokens.
inline std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    char c = text[i];
    if (detail::is_space(c)) {
      ++i;
      continue;
    }
    if (detail::is_digit(c)) {
      std::size_t j = i + 1;
      while (j < n) {
        if (detail::is_digit(text[j])) {
          ++j;
        } else if ((text[j] == ',' || text[j] == '.') && j + 1 < n &&
                   detail::is_digit(text[j + 1])) {
          ++j;
        } else {
          break;
        }
      }
      out.push_back({text.substr(i, j - i), i, j, TokenKind::Number});
      i = j;
    } else if (detail::is_word_char(c)) {
      std::size_t j = i + 1;
      while (j < n && detail::is_word_char(text[j])) ++j;
      out.push_back({text.substr(i, j - i), i, j, TokenKind::Word});
      i = j;
    } else {
      out.push_back({text.substr(i, 1), i, i + 1, TokenKind::Punct});
      ++i;
    }
  }
  return out;
}

inline std::vector<Token> tokenize_span(const std::string& text, SentenceSpan span) {
  auto toks = tokenize(text.substr(span.begin, span.end - span.begin));
  for (auto& t : toks) {
    t.begin += span.begin;
    t.end += span.begin;
  }
  return toks;
}

// ---------------------------------------------------------------------------
// Entity tagging
// ---------------------------------------------------------------------------

enum class EntityType { Name, Number, Date, Other };

struct EntitySpan {
  std::string text;
  std::size_t token_begin = 0;  // token indices, half-open
  std::size_t token_end = 0;
  EntityType etype = EntityType::Other;
};

namespace detail {

inline const std::unordered_set<std::string>& spelled_numerals() {
  static const std::unordered_set<std::string> words = {
      "zero",    "one",     "two",      "three",    "four",    "five",
      "six",     "seven",   "eight",    "nine",     "ten",     "eleven",
      "twelve",  "thirteen", "fourteen", "fifteen", "sixteen", "seventeen",
      "eighteen", "nineteen", "twenty",  "thirty",  "forty",   "fifty",
      "sixty",   "seventy", "eighty",   "ninety",   "hundred", "thousand",
      "million", "billion", "twice",    "thrice",
  };
  return words;
}

inline const std::unordered_set<std::string>& month_names() {
  static const std::unordered_set<std::string> words = {
      "january", "february", "march",     "april",   "may",      "june",
      "july",    "august",   "september", "october", "november", "december",
  };
  return words;
}

inline const std::unordered_set<std::string>& weekday_names() {
  static const std::unordered_set<std::string> words = {
      "monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday",
  };
  return words;
}

// Capitalized function words that never start or join a NAME run.
inline const std::unordered_set<std::string>& name_stopwords() {
  static const std::unordered_set<std::string> words = {
      "the",  "a",     "an",    "this",  "that", "these", "those", "it",
      "he",   "she",   "they",  "we",    "i",    "you",   "but",   "and",
      "or",   "nor",   "if",    "when",  "while", "after", "before", "on",
      "in",   "at",    "for",   "with",  "from", "to",    "by",    "as",
      "his",  "her",   "their", "our",   "its",  "my",    "your",  "is",
      "are",  "was",   "were",  "be",    "been", "not",   "no",    "now",
  };
  return words;
}

inline bool is_capitalized(const Token& t) {
  return t.kind == TokenKind::Word && !t.text.empty() && is_upper(t.text[0]);
}

inline bool is_month(const Token& t) {
  return t.kind == TokenKind::Word && month_names().count(lower(t.text)) > 0;
}
inline bool is_weekday(const Token& t) {
  return t.kind == TokenKind::Word && weekday_names().count(lower(t.text)) > 0;
}
inline bool is_numeral_word(const Token& t) {
  return t.kind == TokenKind::Word && spelled_numerals().count(lower(t.text)) > 0;
}

inline bool is_name_token(const Token& t) {
  if (!is_capitalized(t)) return false;
  const std::string lo = lower(t.text);
  return name_stopwords().count(lo) == 0 && month_names().count(lo) == 0 &&
         weekday_names().count(lo) == 0 && spelled_numerals().count(lo) == 0;
}

inline std::string join_tokens(const std::vector<Token>& toks, std::size_t b, std::size_t e) {
  std::string out;
  for (std::size_t k = b; k < e; ++k) {
    if (k > b) out += ' ';
    out += toks[k].text;
  }
  return out;
}

}  // namespace detail

// Deterministic typed entity spans: DATE (month/weekday, optionally adjoined
// with a NUMBER token), NAME (maximal capitalized runs minus stopwords),
// NUMBER (digit tokens and spelled numerals). Longest-match-first, no overlap.
inline std::vector<EntitySpan> tag_entities(const std::vector<Token>& toks) {
  std::vector<EntitySpan> out;
  const std::size_t n = toks.size();
  std::size_t i = 0;
  while (i < n) {
    // DATE: NUMBER + month, or month/weekday (+ NUMBER)
    if (toks[i].kind == TokenKind::Number && i + 1 < n && detail::is_month(toks[i + 1])) {
      out.push_back({detail::join_tokens(toks, i, i + 2), i, i + 2, EntityType::Date});
      i += 2;
      continue;
    }
    if (detail::is_month(toks[i]) || detail::is_weekday(toks[i])) {
      std::size_t j = i + 1;
      if (j < n && toks[j].kind == TokenKind::Number) ++j;
      out.push_back({detail::join_tokens(toks, i, j), i, j, EntityType::Date});
      i = j;
      continue;
    }
    if (detail::is_name_token(toks[i])) {
      std::size_t j = i + 1;
      while (j < n && detail::is_name_token(toks[j])) ++j;
      out.push_back({detail::join_tokens(toks, i, j), i, j, EntityType::Name});
      i = j;
      continue;
    }
    if (toks[i].kind == TokenKind::Number || detail::is_numeral_word(toks[i])) {
      out.push_back({toks[i].text, i, i + 1, EntityType::Number});
      ++i;
      continue;
    }
    ++i;
  }
  return out;
}

// ---------------------------------------------------------------------------
// BPE subword vocabulary
// ---------------------------------------------------------------------------

struct SubwordVocab {
  static constexpr int pad_id = 0;
  static constexpr int bos_id = 1;
  static constexpr int eos_id = 2;
  static constexpr int sep_id = 3;
  static constexpr int unk_id = 4;
  static constexpr std::size_t special_count = 5;

  std::vector<std::string> pieces;  // id = index; first five are the specials
  std::vector<std::pair<std::string, std::string>> merges;

  std::size_t size() const { return pieces.size(); }
  bool is_special(int id) const { return id >= 0 && id < static_cast<int>(special_count); }

  int piece_id(std::string_view piece) const {
    auto it = index_.find(std::string(piece));
    return it == index_.end() ? -1 : it->second;
  }

  void rebuild_index() {
    index_.clear();
    max_piece_bytes_ = 1;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      index_.emplace(pieces[i], static_cast<int>(i));
      if (i >= special_count) max_piece_bytes_ = std::max(max_piece_bytes_, pieces[i].size());
    }
  }

  std::size_t max_piece_bytes() const { return max_piece_bytes_; }

 private:
  std::unordered_map<std::string, int> index_;
  std::size_t max_piece_bytes_ = 1;
};

inline const std::vector<std::string>& special_pieces() {
  static const std::vector<std::string> sp = {"<pad>", "<bos>", "<eos>", "<sep>", "<unk>"};
  return sp;
}

// Standard BPE merge training over word-frequency counts. Whitespace
// codepoints become standalone pieces so encode/decode round-trips exactly.
// Ties in pair frequency break toward the lexicographically smaller pair.
inline SubwordVocab train_bpe(const std::vector<std::string>& corpus, std::size_t target_size) {
  std::map<std::string, std::int64_t> word_freq;
  std::set<std::string> alphabet;
  for (const auto& doc : corpus) {
    for (const auto& tok : tokenize(doc)) ++word_freq[tok.text];
    for (const auto& cp : detail::split_codepoints(doc))
      if (cp.size() == 1 && detail::is_space(cp[0])) alphabet.insert(cp);
  }
  if (word_freq.empty()) fail(Errc::empty_corpus, "train_bpe: corpus has no tokens");

  std::map<std::string, std::vector<std::string>> word_sym;
  for (const auto& [word, freq] : word_freq) {
    auto cps = detail::split_codepoints(word);
    for (const auto& cp : cps) alphabet.insert(cp);
    word_sym.emplace(word, std::move(cps));
  }

  SubwordVocab vocab;
  vocab.pieces = special_pieces();
  for (const auto& a : alphabet) vocab.pieces.push_back(a);
  if (target_size < vocab.pieces.size())
    fail(Errc::config_invalid, "train_bpe: target_size " + std::to_string(target_size) +
                                   " below specials + alphabet (" +
                                   std::to_string(vocab.pieces.size()) + ")");

  std::unordered_set<std::string> piece_set(vocab.pieces.begin(), vocab.pieces.end());
  while (vocab.pieces.size() < target_size) {
    std::map<std::pair<std::string, std::string>, std::int64_t> pair_count;
    for (const auto& [word, syms] : word_sym) {
      const auto freq = word_freq[word];
      for (std::size_t k = 0; k + 1 < syms.size(); ++k)
        pair_count[{syms[k], syms[k + 1]}] += freq;
    }
    if (pair_count.empty()) break;
    std::pair<std::string, std::string> best;
    std::int64_t best_count = 0;
    for (const auto& [pair, cnt] : pair_count) {
      if (cnt > best_count) {  // map order already yields the smallest pair on ties
        best = pair;
        best_count = cnt;
      }
    }
    vocab.merges.push_back(best);
    const std::string merged = best.first + best.second;
    if (piece_set.insert(merged).second) vocab.pieces.push_back(merged);
    for (auto& [word, syms] : word_sym) {
      std::vector<std::string> next;
      next.reserve(syms.size());
      std::size_t k = 0;
      while (k < syms.size()) {
        if (k + 1 < syms.size() && syms[k] == best.first && syms[k + 1] == best.second) {
          next.push_back(merged);
          k += 2;
        } else {
          next.push_back(syms[k]);
          ++k;
        }
      }
      syms = std::move(next);
    }
  }
  vocab.rebuild_index();
  return vocab;
}

// Greedy longest-match segmentation against the piece inventory. Unknown
// codepoints map to UNK (one per codepoint). Specials never match raw text.
inline std::vector<int> encode(const SubwordVocab& vocab, const std::string& text) {
  std::vector<int> ids;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    const std::size_t cap = std::min(vocab.max_piece_bytes(), n - i);
    int found = -1;
    std::size_t found_len = 0;
    for (std::size_t len = cap; len >= 1; --len) {
      int id = vocab.piece_id(std::string_view(text).substr(i, len));
      if (id >= static_cast<int>(SubwordVocab::special_count)) {
        found = id;
        found_len = len;
        break;
      }
    }
    if (found >= 0) {
      ids.push_back(found);
      i += found_len;
    } else {
      ids.push_back(SubwordVocab::unk_id);
      i += detail::split_codepoints(std::string_view(text).substr(i, 4))[0].size();
    }
  }
  return ids;
}

inline std::string decode(const SubwordVocab& vocab, const std::vector<int>& ids) {
  std::string out;
  for (int id : ids) {
    if (id < 0 || id >= static_cast<int>(vocab.pieces.size()))
      fail(Errc::id_out_of_range, "decode: id " + std::to_string(id) + " out of range");
    if (vocab.is_special(id)) continue;
    out += vocab.pieces[static_cast<std::size_t>(id)];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Vocabulary file: "BPEv1 <piece_count>" header, one piece per line, then
// merges as "M <left> <right>" lines in training order.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string escape_piece(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '\\')
      out += "\\\\";
    else if (c == '\n')
      out += "\\n";
    else if (c == '\t')
      out += "\\t";
    else if (c == '\r')
      out += "\\r";
    else
      out += c;
  }
  return out;
}

inline std::string unescape_piece(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      char c = s[++i];
      if (c == 'n')
        out += '\n';
      else if (c == 't')
        out += '\t';
      else if (c == 'r')
        out += '\r';
      else
        out += c;
    } else {
      out += s[i];
    }
  }
  return out;
}

}  // namespace detail

inline void save_vocab(const SubwordVocab& vocab, std::ostream& os) {
  os << "BPEv1 " << vocab.pieces.size() << "\n";
  for (const auto& p : vocab.pieces) os << detail::escape_piece(p) << "\n";
  for (const auto& [l, r] : vocab.merges)
    os << "M " << detail::escape_piece(l) << " " << detail::escape_piece(r) << "\n";
}

inline SubwordVocab load_vocab(std::istream& is) {
  std::string header;
  if (!std::getline(is, header) || header.rfind("BPEv1 ", 0) != 0)
    fail(Errc::malformed_line, "vocab file: missing BPEv1 header");
  const std::size_t count = std::stoull(header.substr(6));
  SubwordVocab vocab;
  vocab.pieces.reserve(count);
  std::string line;
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(is, line)) fail(Errc::malformed_line, "vocab file: truncated piece list");
    vocab.pieces.push_back(detail::unescape_piece(line));
  }
  for (std::size_t i = 0; i < SubwordVocab::special_count; ++i)
    if (i >= vocab.pieces.size() || vocab.pieces[i] != special_pieces()[i])
      fail(Errc::malformed_line, "vocab file: special pieces corrupted");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.rfind("M ", 0) != 0) fail(Errc::malformed_line, "vocab file: bad merge line");
    const auto sp = line.find(' ', 2);
    if (sp == std::string::npos) fail(Errc::malformed_line, "vocab file: bad merge line");
    vocab.merges.emplace_back(detail::unescape_piece(line.substr(2, sp - 2)),
                              detail::unescape_piece(line.substr(sp + 1)));
  }
  vocab.rebuild_index();
  return vocab;
}

}  // namespace factsum::textkit
