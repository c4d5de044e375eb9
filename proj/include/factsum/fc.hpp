#pragma once

// The factual corrector: synthetic corruption forges (entity swap, pronoun
// swap, negation toggle, pluggable paraphrase) and a seq2seq correction
// model trained as a denoising autoencoder. The corrector reuses the
// summarizer's encoder-decoder without the knowledge-graph sublayer.

#include <optional>
#include <string>
#include <vector>

#include "factsum/fasum.hpp"

namespace factsum::fc {

enum class Transform { EntitySwap, PronounSwap, Negation, ParaphraseStub };

inline const char* transform_name(Transform t) {
  switch (t) {
    case Transform::EntitySwap: return "entity_swap";
    case Transform::PronounSwap: return "pronoun_swap";
    case Transform::Negation: return "negation";
    case Transform::ParaphraseStub: return "paraphrase_stub";
  }
  return "?";
}

inline std::optional<Transform> transform_from_name(const std::string& name) {
  if (name == "entity_swap") return Transform::EntitySwap;
  if (name == "pronoun_swap") return Transform::PronounSwap;
  if (name == "negation") return Transform::Negation;
  if (name == "paraphrase_stub") return Transform::ParaphraseStub;
  return std::nullopt;
}

struct CorruptionSample {
  std::string article;
  std::string clean_summary;
  std::string corrupted_summary;
  Transform transform = Transform::ParaphraseStub;
  std::optional<std::pair<std::string, std::string>> swap;  // (original, replacement)
};

// Where real back-translation would plug in. The default implementation is
// the identity, emitted as PARAPHRASE_STUB samples.
struct Paraphraser {
  virtual ~Paraphraser() = default;
  virtual std::string paraphrase(const std::string& text, neuro::Rng& rng) const = 0;
};

struct IdentityParaphraser final : Paraphraser {
  std::string paraphrase(const std::string& text, neuro::Rng&) const override { return text; }
};

namespace detail {

using textkit::Token;

// Replaces tokens [first, last) of `text` with `replacement`, splicing on
// byte offsets so original spacing elsewhere is preserved.
inline std::string splice_tokens(const std::string& text, const std::vector<Token>& toks,
                                 std::size_t first, std::size_t last,
                                 const std::string& replacement) {
  const std::size_t b = toks[first].begin;
  const std::size_t e = toks[last - 1].end;
  return text.substr(0, b) + replacement + text.substr(e);
}

// Removes token i along with the gap separating it from its left neighbour.
inline std::string erase_token(const std::string& text, const std::vector<Token>& toks,
                               std::size_t i) {
  const std::size_t b = i > 0 ? toks[i - 1].end : toks[i].begin;
  std::size_t e = toks[i].end;
  if (i == 0)  // also swallow the gap to the right so no leading space remains
    e = i + 1 < toks.size() ? toks[i + 1].begin : e;
  return text.substr(0, b) + text.substr(e);
}

inline bool same_cap(char a) { return a >= 'A' && a <= 'Z'; }

inline std::string match_capitalization(const std::string& original,
                                        std::string replacement) {
  if (original.empty() || replacement.empty()) return replacement;
  if (same_cap(original[0]) && replacement[0] >= 'a' && replacement[0] <= 'z')
    replacement[0] = static_cast<char>(replacement[0] - 'a' + 'A');
  if (!same_cap(original[0]) && same_cap(replacement[0]))
    replacement[0] = static_cast<char>(replacement[0] - 'A' + 'a');
  return replacement;
}

}  // namespace detail

// Replaces one summary entity occurrence with a same-type article entity of
// different text, both chosen uniformly under the caller's rng. Returns
// nothing when no eligible pair exists.
inline std::optional<CorruptionSample> forge_entity_swap(const std::string& summary,
                                                         const std::string& article,
                                                         neuro::Rng& rng) {
  const auto sum_toks = textkit::tokenize(summary);
  const auto sum_ents = textkit::tag_entities(sum_toks);
  const auto art_ents = textkit::tag_entities(textkit::tokenize(article));

  struct Option {
    std::size_t ent_index;
    std::vector<std::string> replacements;
  };
  std::vector<Option> eligible;
  for (std::size_t i = 0; i < sum_ents.size(); ++i) {
    std::set<std::string> alts;
    for (const auto& a : art_ents)
      if (a.etype == sum_ents[i].etype && a.text != sum_ents[i].text) alts.insert(a.text);
    if (!alts.empty())
      eligible.push_back({i, std::vector<std::string>(alts.begin(), alts.end())});
  }
  if (eligible.empty()) return std::nullopt;

  const auto& pick = eligible[rng.index(eligible.size())];
  const auto& ent = sum_ents[pick.ent_index];
  const std::string replacement = pick.replacements[rng.index(pick.replacements.size())];

  CorruptionSample out;
  out.article = article;
  out.clean_summary = summary;
  out.corrupted_summary = detail::splice_tokens(summary, sum_toks, ent.token_begin,
                                                ent.token_end, replacement);
  out.transform = Transform::EntitySwap;
  out.swap = {ent.text, replacement};
  return out;
}

namespace detail {

// Directed closed pronoun table; the first listed pair wins for "her".
inline std::optional<std::string> pronoun_swap_of(const std::string& lower) {
  if (lower == "he") return "she";
  if (lower == "she") return "he";
  if (lower == "his") return "her";
  if (lower == "her") return "his";
  if (lower == "him") return "her";
  if (lower == "they") return "he";
  if (lower == "their") return "his";
  return std::nullopt;
}

}  // namespace detail

inline std::optional<CorruptionSample> forge_pronoun_swap(const std::string& summary,
                                                          const std::string& article,
                                                          neuro::Rng& rng) {
  const auto toks = textkit::tokenize(summary);
  std::vector<std::pair<std::size_t, std::string>> sites;  // (token index, replacement)
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].kind != textkit::TokenKind::Word) continue;
    if (auto swap = detail::pronoun_swap_of(textkit::detail::lower(toks[i].text)))
      sites.emplace_back(i, detail::match_capitalization(toks[i].text, *swap));
  }
  if (sites.empty()) return std::nullopt;
  const auto& [idx, replacement] = sites[rng.index(sites.size())];
  CorruptionSample out;
  out.article = article;
  out.clean_summary = summary;
  out.corrupted_summary = detail::splice_tokens(summary, toks, idx, idx + 1, replacement);
  out.transform = Transform::PronounSwap;
  out.swap = {toks[idx].text, replacement};
  return out;
}

namespace detail {

inline const std::set<std::string>& negation_auxes() {
  static const std::set<std::string> words = {"is",  "are",  "was", "were", "has",
                                              "have", "had", "will", "can"};
  return words;
}

}  // namespace detail

// Toggles negation at the first eligible site: removes an existing "not"
// (or expands an "n't" contraction), otherwise inserts "not" after the first
// auxiliary from the closed list.
inline std::optional<CorruptionSample> forge_negation(const std::string& summary,
                                                      const std::string& article,
                                                      neuro::Rng&) {
  const auto toks = textkit::tokenize(summary);
  CorruptionSample out;
  out.article = article;
  out.clean_summary = summary;
  out.transform = Transform::Negation;

  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].kind != textkit::TokenKind::Word) continue;
    const auto lo = textkit::detail::lower(toks[i].text);
    if (lo == "not") {
      out.corrupted_summary = detail::erase_token(summary, toks, i);
      return out;
    }
  }
  // contractions: isn't -> is, can't -> can, won't -> will
  if (const auto pos = summary.find("n't"); pos != std::string::npos) {
    std::string fixed = summary;
    if (pos >= 2 && summary.compare(pos - 2, 5, "won't") == 0)
      fixed = summary.substr(0, pos - 2) + "will" + summary.substr(pos + 3);
    else
      fixed = summary.substr(0, pos) + summary.substr(pos + 3);
    out.corrupted_summary = fixed;
    return out;
  }
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].kind != textkit::TokenKind::Word) continue;
    if (detail::negation_auxes().count(textkit::detail::lower(toks[i].text))) {
      out.corrupted_summary =
          summary.substr(0, toks[i].end) + " not" + summary.substr(toks[i].end);
      return out;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Dataset forging
// ---------------------------------------------------------------------------

struct FcDataset {
  std::vector<CorruptionSample> samples;
  std::size_t skipped = 0;  // corruption draws that found no eligible site
};

// Per pair: `per_pair` corruptions cycling through the enabled transforms
// (skips passed over), plus one identity sample through the paraphraser so
// the corrector learns to preserve already-correct summaries.
inline FcDataset make_fc_dataset(const std::vector<data::DocumentPair>& pairs,
                                 std::size_t per_pair, std::vector<Transform> transforms,
                                 std::uint64_t seed,
                                 const Paraphraser& paraphraser = IdentityParaphraser{}) {
  if (per_pair == 0) fail(Errc::config_invalid, "make_fc_dataset: per_pair must be >= 1");
  if (transforms.empty())
    transforms = {Transform::EntitySwap, Transform::PronounSwap, Transform::Negation};
  FcDataset out;
  neuro::Rng rng(seed);
  for (const auto& pair : pairs) {
    std::size_t made = 0, attempts = 0;
    const std::size_t max_attempts = per_pair * transforms.size();
    for (std::size_t k = 0; made < per_pair && attempts < max_attempts; ++k, ++attempts) {
      const Transform tr = transforms[k % transforms.size()];
      std::optional<CorruptionSample> sample;
      switch (tr) {
        case Transform::EntitySwap:
          sample = forge_entity_swap(pair.summary, pair.article, rng);
          break;
        case Transform::PronounSwap:
          sample = forge_pronoun_swap(pair.summary, pair.article, rng);
          break;
        case Transform::Negation:
          sample = forge_negation(pair.summary, pair.article, rng);
          break;
        case Transform::ParaphraseStub: {
          CorruptionSample s;
          s.article = pair.article;
          s.clean_summary = pair.summary;
          s.corrupted_summary = paraphraser.paraphrase(pair.summary, rng);
          s.transform = Transform::ParaphraseStub;
          sample = s;
          break;
        }
      }
      if (sample.has_value()) {
        out.samples.push_back(std::move(*sample));
        ++made;
      } else {
        ++out.skipped;
      }
    }
    // identity sample through the paraphrase interface
    CorruptionSample ident;
    ident.article = pair.article;
    ident.clean_summary = pair.summary;
    ident.corrupted_summary = paraphraser.paraphrase(pair.summary, rng);
    ident.transform = Transform::ParaphraseStub;
    out.samples.push_back(std::move(ident));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Correction model
// ---------------------------------------------------------------------------

// BOS + summary + SEP + article + EOS, truncated to max_input_len.
inline std::vector<int> build_correction_input(const textkit::SubwordVocab& vocab,
                                               const std::string& summary,
                                               const std::string& article, bool lowercase,
                                               std::size_t max_input_len) {
  std::vector<int> ids;
  ids.push_back(textkit::SubwordVocab::bos_id);
  const auto sids = fasum::encode_text(vocab, summary, lowercase);
  const auto aids = fasum::encode_text(vocab, article, lowercase);
  ids.insert(ids.end(), sids.begin(), sids.end());
  ids.push_back(textkit::SubwordVocab::sep_id);
  ids.insert(ids.end(), aids.begin(), aids.end());
  ids.push_back(textkit::SubwordVocab::eos_id);
  if (ids.size() > max_input_len) {
    ids.resize(max_input_len);
    ids.back() = textkit::SubwordVocab::eos_id;
  }
  return ids;
}

inline FasumConfig corrector_config(FasumConfig cfg) {
  cfg.use_kg = false;  // no graph sublayer in the corrector
  cfg.beam_width = 2;
  cfg.trigram_block = true;
  return cfg;
}

inline fasum::SeqExample make_corrector_example(const CorruptionSample& sample,
                                                const textkit::SubwordVocab& vocab,
                                                const FasumConfig& cfg) {
  fasum::SeqExample ex;
  ex.src_ids = build_correction_input(vocab, sample.corrupted_summary, sample.article,
                                      cfg.lowercase, cfg.max_article_len);
  ex.tgt_ids = fasum::encode_text(vocab, sample.clean_summary, cfg.lowercase);
  ex.tgt_text = cfg.lowercase ? textkit::detail::lower(sample.clean_summary)
                              : sample.clean_summary;
  return ex;
}

template <typename T>
fasum::TrainReport train_corrector(const FcDataset& dataset,
                                   const textkit::SubwordVocab& vocab, const FasumConfig& base,
                                   neuro::ParameterStore<T>& store) {
  if (dataset.samples.empty()) fail(Errc::empty_dataset, "train_corrector: no samples");
  const FasumConfig cfg = corrector_config(base);
  std::vector<fasum::SeqExample> examples;
  examples.reserve(dataset.samples.size());
  for (const auto& s : dataset.samples) examples.push_back(make_corrector_example(s, vocab, cfg));
  fasum::FasumModel<T> model(cfg, store);
  return fasum::train_seq2seq(model, store, vocab, examples, {}, cfg);
}

// ---------------------------------------------------------------------------
// Correction inference with a token-level diff report
// ---------------------------------------------------------------------------

struct DiffOp {
  enum class Kind { Replace, Insert, Delete };
  Kind kind = Kind::Replace;
  std::string before;  // token text in the input summary (empty for Insert)
  std::string after;   // token text in the output (empty for Delete)
};

struct CorrectionResult {
  std::string corrected;
  std::vector<DiffOp> diff;
  std::size_t changed_tokens = 0;  // unit-cost edit distance between the token streams
};

namespace detail {

// Token-level Levenshtein alignment; substitutions cost 1.
inline std::vector<DiffOp> token_diff(const std::vector<std::string>& a,
                                      const std::vector<std::string>& b) {
  const std::size_t m = a.size(), n = b.size();
  std::vector<std::vector<std::size_t>> d(m + 1, std::vector<std::size_t>(n + 1, 0));
  for (std::size_t i = 0; i <= m; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= n; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= m; ++i)
    for (std::size_t j = 1; j <= n; ++j)
      d[i][j] = a[i - 1] == b[j - 1]
                    ? d[i - 1][j - 1]
                    : 1 + std::min({d[i - 1][j - 1], d[i - 1][j], d[i][j - 1]});
  std::vector<DiffOp> ops;
  std::size_t i = m, j = n;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && a[i - 1] == b[j - 1]) {
      --i;
      --j;
    } else if (i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + 1) {
      ops.push_back({DiffOp::Kind::Replace, a[i - 1], b[j - 1]});
      --i;
      --j;
    } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      ops.push_back({DiffOp::Kind::Delete, a[i - 1], ""});
      --i;
    } else {
      ops.push_back({DiffOp::Kind::Insert, "", b[j - 1]});
      --j;
    }
  }
  std::reverse(ops.begin(), ops.end());
  return ops;
}

}  // namespace detail

// Concatenates the candidate summary with the article, decodes with beam
// width 2 and trigram blocking, and reports the token-level changes.
template <typename T>
CorrectionResult correct(const std::string& summary, const std::string& article,
                         const textkit::SubwordVocab& vocab, const FasumConfig& base,
                         neuro::ParameterStore<T>& store) {
  const FasumConfig cfg = corrector_config(base);
  fasum::FasumModel<T> model(cfg, store);
  const auto src = build_correction_input(vocab, summary, article, cfg.lowercase,
                                          cfg.max_article_len);
  const auto gen = fasum::beam_search(model, vocab, src, nullptr, cfg);
  CorrectionResult out;
  out.corrected = gen.text;
  std::vector<std::string> before, after;
  for (const auto& t : textkit::tokenize(summary)) before.push_back(t.text);
  for (const auto& t : textkit::tokenize(out.corrected)) after.push_back(t.text);
  out.diff = detail::token_diff(before, after);
  out.changed_tokens = out.diff.size();
  return out;
}

}  // namespace factsum::fc
