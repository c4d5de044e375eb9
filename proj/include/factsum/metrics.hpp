#pragma once

// Model-free metrics: the three-way tuple classification with the two
// relation matching rates, novel n-gram ratios, ROUGE-1/2/L F1, and the
// sentence-mean factual score aggregation. All matching is over lowercased
// tokens; absent values (empty denominators) stay absent rather than 0.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "factsum/openie.hpp"

namespace factsum::metrics {

enum class TupleCategory { CorrectHit, WrongHit, Miss };

struct HitCounts {
  std::size_t correct = 0;
  std::size_t wrong = 0;
  std::size_t miss = 0;
};

// Index of the article tuple set for the three-way membership tests.
struct ArticleTupleIndex {
  std::set<std::string> sro;  // normalized subject \x1f relation \x1f object
  std::set<std::string> sr;   // subject \x1f relation
  std::set<std::string> ro;   // relation \x1f object

  explicit ArticleTupleIndex(const openie::TupleSet& article) {
    for (const auto& t : article.tuples) {
      const auto s = openie::detail::normalize_slot(t.subject);
      const auto r = openie::detail::normalize_slot(t.relation);
      const auto o = openie::detail::normalize_slot(t.object);
      sro.insert(s + "\x1f" + r + "\x1f" + o);
      sr.insert(s + "\x1f" + r);
      ro.insert(r + "\x1f" + o);
    }
  }
};

// Correct hit: (s,r,o) in the article set. Wrong hit: same subject+relation
// with a different object, or same relation+object with a different subject.
// Miss: everything else. Checked in that order.
inline TupleCategory classify_tuple(const openie::RelationTuple& t,
                                    const ArticleTupleIndex& article) {
  const auto s = openie::detail::normalize_slot(t.subject);
  const auto r = openie::detail::normalize_slot(t.relation);
  const auto o = openie::detail::normalize_slot(t.object);
  if (article.sro.count(s + "\x1f" + r + "\x1f" + o)) return TupleCategory::CorrectHit;
  if (article.sr.count(s + "\x1f" + r) || article.ro.count(r + "\x1f" + o))
    return TupleCategory::WrongHit;
  return TupleCategory::Miss;
}

struct RmrResult {
  std::optional<double> rmr1;  // 100 * C / (C + W), absent when C+W = 0
  std::optional<double> rmr2;  // 100 * C / (C + W + M), absent when R_s is empty
  HitCounts hits;
};

inline RmrResult rmr(const openie::TupleSet& summary_tuples,
                     const openie::TupleSet& article_tuples) {
  const ArticleTupleIndex index(article_tuples);
  RmrResult out;
  std::set<std::string> seen;
  for (const auto& t : summary_tuples.tuples) {
    if (!seen.insert(openie::normalized_key(t)).second) continue;
    switch (classify_tuple(t, index)) {
      case TupleCategory::CorrectHit: ++out.hits.correct; break;
      case TupleCategory::WrongHit: ++out.hits.wrong; break;
      case TupleCategory::Miss: ++out.hits.miss; break;
    }
  }
  const auto c = static_cast<double>(out.hits.correct);
  const auto cw = out.hits.correct + out.hits.wrong;
  const auto cwm = cw + out.hits.miss;
  if (cw > 0) out.rmr1 = 100.0 * c / static_cast<double>(cw);
  if (cwm > 0) out.rmr2 = 100.0 * c / static_cast<double>(cwm);
  return out;
}

namespace detail {

inline std::vector<std::string> lower_tokens(const std::string& text) {
  std::vector<std::string> out;
  for (const auto& t : textkit::tokenize(text)) out.push_back(textkit::detail::lower(t.text));
  return out;
}

inline std::string ngram_at(const std::vector<std::string>& toks, std::size_t i, std::size_t n) {
  std::string key;
  for (std::size_t k = 0; k < n; ++k) {
    if (k) key += '\x1f';
    key += toks[i + k];
  }
  return key;
}

}  // namespace detail

// Percentage of summary n-gram positions whose n-gram never occurs in the
// article. Absent when the summary has fewer than n tokens.
inline std::optional<double> novel_ngram_ratio(const std::string& summary,
                                               const std::string& article, std::size_t n) {
  if (n == 0) fail(Errc::config_invalid, "novel_ngram_ratio: n must be positive");
  const auto sum_toks = detail::lower_tokens(summary);
  const auto art_toks = detail::lower_tokens(article);
  if (sum_toks.size() < n) return std::nullopt;
  std::set<std::string> article_ngrams;
  for (std::size_t i = 0; i + n <= art_toks.size(); ++i)
    article_ngrams.insert(detail::ngram_at(art_toks, i, n));
  std::size_t total = 0, novel = 0;
  for (std::size_t i = 0; i + n <= sum_toks.size(); ++i) {
    ++total;
    if (!article_ngrams.count(detail::ngram_at(sum_toks, i, n))) ++novel;
  }
  return 100.0 * static_cast<double>(novel) / static_cast<double>(total);
}

enum class RougeVariant { R1, R2, RL };

namespace detail {

inline double f1(double precision, double recall) {
  const double s = precision + recall;
  return s > 0 ? 2.0 * precision * recall / s : 0.0;
}

inline double rouge_n(const std::vector<std::string>& cand,
                      const std::vector<std::string>& ref, std::size_t n) {
  if (cand.size() < n || ref.size() < n) return 0.0;
  std::map<std::string, std::size_t> ref_counts;
  for (std::size_t i = 0; i + n <= ref.size(); ++i) ++ref_counts[ngram_at(ref, i, n)];
  std::map<std::string, std::size_t> cand_counts;
  for (std::size_t i = 0; i + n <= cand.size(); ++i) ++cand_counts[ngram_at(cand, i, n)];
  std::size_t overlap = 0;
  for (const auto& [g, c] : cand_counts) {
    const auto it = ref_counts.find(g);
    if (it != ref_counts.end()) overlap += std::min(c, it->second);  // clipped counts
  }
  const auto cand_total = cand.size() - n + 1;
  const auto ref_total = ref.size() - n + 1;
  return f1(static_cast<double>(overlap) / static_cast<double>(cand_total),
            static_cast<double>(overlap) / static_cast<double>(ref_total));
}

inline std::size_t lcs_length(const std::vector<std::string>& a,
                              const std::vector<std::string>& b) {
  const std::size_t m = a.size(), n = b.size();
  std::vector<std::size_t> prev(n + 1, 0), cur(n + 1, 0);
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[n];
}

}  // namespace detail

// F1 ROUGE over lowercased tokens; no stemming, no stopword removal.
inline double rouge_f1(const std::string& candidate, const std::string& reference,
                       RougeVariant variant) {
  const auto cand = detail::lower_tokens(candidate);
  const auto ref = detail::lower_tokens(reference);
  if (cand.empty() || ref.empty()) return 0.0;
  switch (variant) {
    case RougeVariant::R1: return detail::rouge_n(cand, ref, 1);
    case RougeVariant::R2: return detail::rouge_n(cand, ref, 2);
    case RougeVariant::RL: {
      const auto lcs = static_cast<double>(detail::lcs_length(cand, ref));
      return detail::f1(lcs / static_cast<double>(cand.size()),
                        lcs / static_cast<double>(ref.size()));
    }
  }
  return 0.0;
}

// A claim scorer maps (article, claim sentence) to a probability in [0, 1].
using ClaimScorer = std::function<double(const std::string& article, const std::string& claim)>;

// Sentence-mean aggregation of per-claim scores over the summary.
inline double factual_score(const std::string& article, const std::string& summary,
                            const ClaimScorer& scorer) {
  const auto spans = textkit::split_sentences(summary);
  if (spans.empty()) fail(Errc::empty_summary, "factual_score: summary has no sentences");
  double total = 0.0;
  for (const auto& sp : spans)
    total += scorer(article, summary.substr(sp.begin, sp.end - sp.begin));
  return total / static_cast<double>(spans.size());
}

}  // namespace factsum::metrics
