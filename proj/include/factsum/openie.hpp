#pragma once

// Deterministic (subject, relation, object) extraction from sentences using
// a closed pattern grammar over word classes. Stands in for a full OpenIE
// system: the downstream graph and metrics only need reproducible triples.

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "factsum/error.hpp"
#include "factsum/textkit.hpp"

namespace factsum::openie {

struct RelationTuple {
  std::string subject;
  std::string relation;
  std::string object;
  std::size_t sentence_index = 0;
  double confidence = 1.0;  // pattern hits are always 1.0
};

struct TupleSet {
  std::string doc_id;
  std::vector<RelationTuple> tuples;  // ordered by (sentence_index, position)
};

namespace detail {

using textkit::Token;
using textkit::TokenKind;

inline const std::unordered_set<std::string>& determiners() {
  static const std::unordered_set<std::string> words = {
      "a", "an", "the", "this", "that", "these", "those",
      "his", "her", "their", "its", "our", "my", "your",
  };
  return words;
}

inline const std::unordered_set<std::string>& auxiliaries() {
  static const std::unordered_set<std::string> words = {
      "is", "are", "was", "were", "am", "be", "been", "being",
      "has", "have", "had", "will", "would", "can", "could",
      "shall", "should", "may", "might", "must", "do", "does", "did",
  };
  return words;
}

inline const std::unordered_set<std::string>& negations() {
  static const std::unordered_set<std::string> words = {"not", "never"};
  return words;
}

inline const std::unordered_set<std::string>& prepositions() {
  static const std::unordered_set<std::string> words = {
      "of", "in", "on", "at", "to", "for", "with", "from", "by",
      "against", "over", "under", "into", "after", "before", "during",
  };
  return words;
}

inline const std::unordered_set<std::string>& conjunctions() {
  static const std::unordered_set<std::string> words = {"and", "or", "but", "nor", "so",
                                                        "because", "although", "though"};
  return words;
}

inline const std::unordered_set<std::string>& pronouns() {
  static const std::unordered_set<std::string> words = {"he", "she", "it", "they", "we",
                                                        "i", "you", "who"};
  return words;
}

// Irregular verbs the morphology rules below would miss.
inline const std::unordered_set<std::string>& verb_lexicon() {
  static const std::unordered_set<std::string> words = {
      "say",   "says",   "said",   "win",    "wins",   "won",    "lose",   "loses",
      "lost",  "beat",   "beats",  "make",   "makes",  "made",   "take",   "takes",
      "took",  "give",   "gives",  "gave",   "go",     "goes",   "went",   "see",
      "sees",  "saw",    "get",    "gets",   "got",    "meet",   "meets",  "met",
      "hold",  "holds",  "held",   "find",   "finds",  "found",  "come",   "comes",
      "came",  "run",    "runs",   "ran",    "lead",   "leads",  "led",    "write",
      "writes", "wrote", "keep",   "keeps",  "kept",   "tell",   "tells",  "told",
      "think", "thinks", "thought", "know",  "knows",  "knew",   "buy",    "buys",
      "bought", "sell",  "sells",  "sold",   "pay",    "pays",   "paid",   "send",
      "sends", "sent",   "spend",  "spends", "spent",  "speak",  "speaks", "spoke",
      "stand", "stands", "stood",  "teach",  "teaches", "taught", "throw", "throws",
      "threw", "grow",   "grows",  "grew",   "hear",   "hears",  "heard",  "fall",
      "falls", "fell",   "draw",   "draws",  "drew",   "drive",  "drives", "drove",
      "become", "becomes", "became", "begin", "begins", "began", "bring",  "brings",
      "brought", "build", "builds", "built", "catch",  "catches", "caught", "choose",
      "chooses", "chose", "feel",   "feels",  "felt",   "fly",    "flies",  "flew",
      "show",  "shows",  "showed", "sing",   "sings",  "sang",   "sit",    "sits",
      "sat",   "rise",   "rises",  "rose",   "eat",    "eats",   "ate",    "score",
      "scores", "scored", "play",  "plays",  "played", "visit",  "visits", "visited",
      "help",  "helps",  "helped",
  };
  return words;
}

// Auxiliaries that must be followed by a verb ("did not score", "will win").
inline const std::unordered_set<std::string>& modal_do_auxes() {
  static const std::unordered_set<std::string> words = {
      "do",   "does",  "did",    "will", "would", "can",
      "could", "shall", "should", "may",  "might", "must",
  };
  return words;
}

inline bool ends_with(const std::string& s, const char* suffix) {
  const std::size_t m = std::char_traits<char>::length(suffix);
  return s.size() >= m && s.compare(s.size() - m, m, suffix) == 0;
}

inline bool is_aux(const Token& t) {
  return t.kind == TokenKind::Word && auxiliaries().count(textkit::detail::lower(t.text)) > 0;
}
inline bool is_neg(const Token& t) {
  return t.kind == TokenKind::Word && negations().count(textkit::detail::lower(t.text)) > 0;
}
inline bool is_det(const Token& t) {
  return t.kind == TokenKind::Word && determiners().count(textkit::detail::lower(t.text)) > 0;
}
inline bool is_prep(const Token& t) {
  return t.kind == TokenKind::Word && prepositions().count(textkit::detail::lower(t.text)) > 0;
}
inline bool is_conj(const Token& t) {
  return t.kind == TokenKind::Word && conjunctions().count(textkit::detail::lower(t.text)) > 0;
}
inline bool is_pronoun(const Token& t) {
  return t.kind == TokenKind::Word && pronouns().count(textkit::detail::lower(t.text)) > 0;
}
inline bool is_numeral_word_like(const Token& t) {
  return t.kind == TokenKind::Word &&
         textkit::detail::spelled_numerals().count(textkit::detail::lower(t.text)) > 0;
}

// A content verb: lexicon hit, or -ed/-es morphology with noun guards. A
// token preceded by a determiner is read as a noun ("the goals"), and a
// capitalized mid-sentence token is read as a name ("Paris").
inline bool is_content_verb(const std::vector<Token>& toks, std::size_t i) {
  const Token& t = toks[i];
  if (t.kind != TokenKind::Word) return false;
  const std::string lo = textkit::detail::lower(t.text);
  if (is_aux(t) || is_neg(t) || is_det(t) || is_prep(t) || is_conj(t) || is_pronoun(t))
    return false;
  if (i > 0 && is_det(toks[i - 1])) return false;
  if (verb_lexicon().count(lo) > 0) return true;
  if (i > 0 && textkit::detail::is_upper(t.text[0])) return false;
  if (ends_with(lo, "ed") && lo.size() >= 4) return true;
  if (ends_with(lo, "s") && !ends_with(lo, "ss") && !ends_with(lo, "us") && lo.size() >= 4) {
    // only with a plausible subject word right before it; a preceding number
    // reads as a count noun ("five goals")
    if (i == 0) return false;
    if (toks[i - 1].kind != TokenKind::Word) return false;
    return !is_numeral_word_like(toks[i - 1]);
  }
  return false;
}

inline bool is_ing_verb(const Token& t) {
  if (t.kind != TokenKind::Word) return false;
  const std::string lo = textkit::detail::lower(t.text);
  return ends_with(lo, "ing") && lo.size() >= 5;
}

// Noun-phrase member on the subject/object side: words and numbers that are
// not function words or verbs. Deliberately weaker than the verb-position
// test: bare -s forms stay inside noun phrases ("five goals").
inline bool is_np_word(const std::vector<Token>& toks, std::size_t i) {
  const Token& t = toks[i];
  if (t.kind == TokenKind::Number) return true;
  if (t.kind != TokenKind::Word) return false;
  if (is_aux(t) || is_neg(t) || is_prep(t) || is_conj(t) || is_det(t)) return false;
  const std::string lo = textkit::detail::lower(t.text);
  if (verb_lexicon().count(lo) > 0) return false;
  if (i > 0 && is_det(toks[i - 1])) return true;
  if (i > 0 && textkit::detail::is_upper(t.text[0])) return true;
  return !(ends_with(lo, "ed") && lo.size() >= 4);
}

struct VerbGroup {
  std::size_t begin = 0;  // token indices, half-open
  std::size_t end = 0;
  bool found = false;
};

// Finds the first finite-verb group at or after `from`: either an auxiliary
// chain (optionally negated, optionally ending in a participle/-ing form) or
// a bare content verb, plus an optional trailing preposition.
inline VerbGroup find_verb_group(const std::vector<Token>& toks, std::size_t from) {
  const std::size_t n = toks.size();
  for (std::size_t i = from; i < n; ++i) {
    if (is_aux(toks[i])) {
      const bool forces_verb =
          modal_do_auxes().count(textkit::detail::lower(toks[i].text)) > 0;
      std::size_t j = i + 1;
      if (j < n && is_neg(toks[j])) ++j;
      while (j < n && is_aux(toks[j])) ++j;
      bool ends_in_verb = false;
      if (j < n) {
        const Token& t = toks[j];
        const std::string lo = textkit::detail::lower(t.text);
        const bool verbish = is_content_verb(toks, j) || is_ing_verb(t) ||
                             (ends_with(lo, "ed") && lo.size() >= 4);
        if (verbish || (forces_verb && t.kind == TokenKind::Word && !is_det(t) &&
                        !is_prep(t) && !is_conj(t) && !is_pronoun(t))) {
          ++j;
          ends_in_verb = true;
        }
      }
      // trailing preposition joins the relation ("plays in"), never a copula
      if (ends_in_verb && j < n && is_prep(toks[j]) && j + 1 < n && is_np_word(toks, j + 1))
        ++j;
      return {i, j, true};
    }
    if (is_content_verb(toks, i)) {
      std::size_t j = i + 1;
      if (j < n && is_neg(toks[j])) ++j;
      if (j < n && is_prep(toks[j]) && j + 1 < n && is_np_word(toks, j + 1)) ++j;
      return {i, j, true};
    }
  }
  return {};
}

// Maximal noun phrase ending at token `end` (exclusive), scanning left.
inline std::pair<std::size_t, std::size_t> np_left_of(const std::vector<Token>& toks,
                                                      std::size_t end) {
  if (end == 0) return {0, 0};
  std::size_t b = end;
  while (b > 0 && is_np_word(toks, b - 1)) --b;
  if (b == end) {
    if (is_pronoun(toks[end - 1])) return {end - 1, end};
    return {0, 0};
  }
  if (b > 0 && is_det(toks[b - 1])) --b;
  return {b, end};
}

// Maximal noun phrase or NUMBER+noun group starting at token `begin`.
inline std::pair<std::size_t, std::size_t> np_right_of(const std::vector<Token>& toks,
                                                       std::size_t begin) {
  const std::size_t n = toks.size();
  std::size_t b = begin;
  if (b >= n) return {0, 0};
  std::size_t e = b;
  if (is_det(toks[e])) ++e;
  while (e < n && is_np_word(toks, e)) ++e;
  if (e == b || (e == b + 1 && is_det(toks[b]))) {
    if (b < n && is_pronoun(toks[b])) return {b, b + 1};
    return {0, 0};
  }
  return {b, e};
}

}  // namespace detail

// Pattern-based extraction from one sentence's tokens: subject NP, finite
// verb group (negation stays inside the relation), object NP. Repeats the
// scan after each extraction; sentences with no verb yield nothing.
inline std::vector<RelationTuple> extract_sentence(const std::vector<textkit::Token>& toks,
                                                   std::size_t sentence_index) {
  std::vector<RelationTuple> out;
  std::size_t from = 0;
  while (from < toks.size()) {
    const auto vg = detail::find_verb_group(toks, from);
    if (!vg.found) break;
    const auto [sb, se] = detail::np_left_of(toks, vg.begin);
    const auto [ob, oe] = detail::np_right_of(toks, vg.end);
    if (se > sb && oe > ob) {
      RelationTuple t;
      t.subject = textkit::detail::join_tokens(toks, sb, se);
      t.relation = textkit::detail::join_tokens(toks, vg.begin, vg.end);
      t.object = textkit::detail::join_tokens(toks, ob, oe);
      t.sentence_index = sentence_index;
      t.confidence = 1.0;
      out.push_back(std::move(t));
      from = oe;
    } else {
      from = vg.end;
    }
  }
  return out;
}

namespace detail {

inline std::string normalize_slot(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (textkit::detail::is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out += ' ';
      pending_space = false;
    }
    out += textkit::detail::is_upper(c) ? static_cast<char>(c - 'A' + 'a') : c;
  }
  return out;
}

}  // namespace detail

inline std::string normalized_key(const RelationTuple& t) {
  return detail::normalize_slot(t.subject) + "\x1f" + detail::normalize_slot(t.relation) +
         "\x1f" + detail::normalize_slot(t.object);
}

// split_sentences -> tokenize -> extract_sentence, then dedup on the
// normalized (s, r, o) key, keeping first occurrences in document order.
inline TupleSet extract_document(const std::string& text, const std::string& doc_id = "") {
  TupleSet set;
  set.doc_id = doc_id;
  const auto sentences = textkit::split_sentences(text);
  std::unordered_set<std::string> seen;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    const auto toks = textkit::tokenize_span(text, sentences[s]);
    for (auto& t : extract_sentence(toks, s)) {
      if (seen.insert(normalized_key(t)).second) set.tuples.push_back(std::move(t));
    }
  }
  return set;
}

}  // namespace factsum::openie
