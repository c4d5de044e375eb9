#pragma once

// The fact-aware summarizer: a transformer encoder-decoder whose decoder
// blocks attend over knowledge-graph node embeddings (single-head, unscaled)
// as a third sublayer after encoder cross-attention. Also the shared seq2seq
// training loop and length-normalized beam search used by the corrector.

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "factsum/config.hpp"
#include "factsum/data.hpp"
#include "factsum/kgraph.hpp"
#include "factsum/metrics.hpp"
#include "factsum/neuro.hpp"

namespace factsum::fasum {

using textkit::SubwordVocab;

inline std::vector<int> encode_text(const SubwordVocab& vocab, const std::string& text,
                                    bool lowercase) {
  return textkit::encode(vocab, lowercase ? textkit::detail::lower(text) : text);
}

// One training example: encoder input ids, decoder target ids, and the
// per-document knowledge graph (absent for the corrector and classifier).
struct SeqExample {
  std::vector<int> src_ids;
  std::vector<int> tgt_ids;
  std::string tgt_text;  // reference text for validation ROUGE
  kgraph::KnowledgeGraph graph;
  bool has_graph = false;
};

template <typename T>
class FasumModel {
 public:
  FasumModel(FasumConfig cfg, neuro::ParameterStore<T>& store) : cfg_(std::move(cfg)), store_(&store) {
    cfg_.validate();
  }

  const FasumConfig& config() const { return cfg_; }

  // Embeddings and encoder blocks only; the claim classifier shares these.
  void declare_encoder_params(neuro::Rng& rng) {
    auto& s = *store_;
    const auto d = cfg_.model_dim;
    s.add_xavier("embed.tok", cfg_.vocab_size, d, rng);
    s.add_xavier("embed.pos_src", cfg_.max_article_len, d, rng);
    for (std::size_t l = 0; l < cfg_.layers; ++l) {
      const std::string enc = "enc.L" + std::to_string(l);
      neuro::declare_mha(s, rng, enc + ".self", d);
      declare_ln(enc + ".ln1", d);
      neuro::declare_linear(s, rng, enc + ".ff.fc1", d, cfg_.ff_dim);
      neuro::declare_linear(s, rng, enc + ".ff.fc2", cfg_.ff_dim, d);
      declare_ln(enc + ".ln2", d);
    }
  }

  // Declares every parameter this configuration uses. Idempotent: shapes are
  // checked when names already exist (e.g. after loading a checkpoint).
  void declare_params(neuro::Rng& rng) {
    auto& s = *store_;
    const auto d = cfg_.model_dim;
    declare_encoder_params(rng);
    s.add_xavier("embed.pos_tgt", cfg_.max_summary_len + 1, d, rng);
    for (std::size_t l = 0; l < cfg_.layers; ++l) {
      const std::string dec = "dec.L" + std::to_string(l);
      neuro::declare_mha(s, rng, dec + ".self", d);
      declare_ln(dec + ".ln1", d);
      neuro::declare_mha(s, rng, dec + ".cross", d);
      declare_ln(dec + ".ln2", d);
      if (cfg_.use_kg) declare_ln(dec + ".ln_kg", d);
      neuro::declare_linear(s, rng, dec + ".ff.fc1", d, cfg_.ff_dim);
      neuro::declare_linear(s, rng, dec + ".ff.fc2", cfg_.ff_dim, d);
      declare_ln(dec + ".ln3", d);
    }
    s.add_xavier("out.w", d, cfg_.vocab_size, rng);
    if (cfg_.use_kg) {
      neuro::declare_bilstm(s, rng, "kg.lstm", d, cfg_.bilstm_hidden);
      for (std::size_t l = 0; l < cfg_.gat_layers; ++l)
        neuro::declare_gat_layer(s, rng, "kg.gat.L" + std::to_string(l), gat_in_width(l),
                                 cfg_.gat_hidden, cfg_.gat_heads);
      neuro::declare_linear(s, rng, "kg.proj", cfg_.gat_hidden, d);
    }
  }

  // Per-node BiLSTM over the node text pieces, stacked, run through the GAT
  // layers, then projected to model width. Empty graphs yield no embedding
  // and the decoder falls back to zero context vectors.
  std::optional<neuro::Value<T>> embed_graph(neuro::Tape<T>& tape,
                                             const kgraph::KnowledgeGraph& graph,
                                             const SubwordVocab& vocab) const {
    if (!cfg_.use_kg || graph.empty()) return std::nullopt;
    auto& s = *store_;
    std::vector<neuro::Value<T>> rows;
    rows.reserve(graph.nodes.size());
    for (const auto& node : graph.nodes) {
      auto ids = encode_text(vocab, node.text, cfg_.lowercase);
      if (ids.empty()) ids.push_back(SubwordVocab::unk_id);
      auto emb = neuro::ops::rows_gather(neuro::param(tape, s, "embed.tok"), ids);
      rows.push_back(neuro::bilstm_final(tape, s, "kg.lstm", emb));
    }
    auto feats = neuro::ops::stack_rows(tape, rows);
    const auto mask = neuro::adjacency_mask<T>(graph.adjacency);
    for (std::size_t l = 0; l < cfg_.gat_layers; ++l) {
      const bool final_layer = l + 1 == cfg_.gat_layers;
      feats = neuro::gat_layer(tape, s, "kg.gat.L" + std::to_string(l), feats, mask,
                               cfg_.gat_heads, final_layer, cfg_.dropout_gat);
    }
    return neuro::linear(tape, s, "kg.proj", feats);
  }

  neuro::Value<T> encode(neuro::Tape<T>& tape, const std::vector<int>& src_ids) const {
    if (src_ids.empty()) fail(Errc::empty_article, "encode: no input tokens");
    auto x = embed(tape, src_ids, "embed.pos_src", cfg_.max_article_len);
    for (std::size_t l = 0; l < cfg_.layers; ++l) {
      const std::string p = "enc.L" + std::to_string(l);
      x = sublayer(tape, p + ".ln1",
                   x, neuro::multi_head_attention(tape, *store_, p + ".self", x, x, cfg_.heads));
      x = sublayer(tape, p + ".ln2", x, feed_forward(tape, p, x));
    }
    return x;
  }

  neuro::Value<T> decoder_states(neuro::Tape<T>& tape, neuro::Value<T> enc_out,
                                 const std::vector<int>& dec_in_ids,
                                 const std::optional<neuro::Value<T>>& node_emb) const {
    if (dec_in_ids.empty()) fail(Errc::empty_summary, "decoder_states: no input tokens");
    auto x = embed(tape, dec_in_ids, "embed.pos_tgt", cfg_.max_summary_len + 1);
    const auto causal = neuro::causal_mask<T>(dec_in_ids.size());
    for (std::size_t l = 0; l < cfg_.layers; ++l) {
      const std::string p = "dec.L" + std::to_string(l);
      x = sublayer(tape, p + ".ln1",
                   x, neuro::multi_head_attention(tape, *store_, p + ".self", x, x, cfg_.heads,
                                                  &causal));
      x = sublayer(tape, p + ".ln2",
                   x, neuro::multi_head_attention(tape, *store_, p + ".cross", x, enc_out,
                                                  cfg_.heads));
      if (cfg_.use_kg)
        x = sublayer(tape, p + ".ln_kg", x, neuro::kg_cross_attention(tape, x, node_emb));
      x = sublayer(tape, p + ".ln3", x, feed_forward(tape, p, x));
    }
    return x;
  }

  neuro::Value<T> logits(neuro::Tape<T>& tape, neuro::Value<T> states) const {
    return neuro::ops::matmul(states, neuro::param(tape, *store_, "out.w"));
  }

  // Teacher-forced loss over one example; also reports token accuracy.
  neuro::Value<T> forward_teacher_forced(neuro::Tape<T>& tape, const SeqExample& ex,
                                         const SubwordVocab& vocab,
                                         double* token_accuracy = nullptr) const {
    if (ex.src_ids.empty()) fail(Errc::empty_article, "forward_teacher_forced: empty article");
    if (ex.tgt_ids.empty()) fail(Errc::empty_summary, "forward_teacher_forced: empty summary");
    auto enc = encode(tape, clipped(ex.src_ids, cfg_.max_article_len));
    std::optional<neuro::Value<T>> node_emb;
    if (ex.has_graph) node_emb = embed_graph(tape, ex.graph, vocab);
    const auto tgt = clipped(ex.tgt_ids, cfg_.max_summary_len);
    std::vector<int> dec_in;
    dec_in.reserve(tgt.size() + 1);
    dec_in.push_back(SubwordVocab::bos_id);
    dec_in.insert(dec_in.end(), tgt.begin(), tgt.end());
    std::vector<int> targets = tgt;
    targets.push_back(SubwordVocab::eos_id);
    auto lg = logits(tape, decoder_states(tape, enc, dec_in, node_emb));
    if (token_accuracy) {
      std::size_t hit = 0;
      for (std::size_t i = 0; i < targets.size(); ++i)
        if (neuro::row_argmax(lg.val(), i) == targets[i]) ++hit;
      *token_accuracy = static_cast<double>(hit) / static_cast<double>(targets.size());
    }
    return neuro::ops::cross_entropy_logits(lg, targets, SubwordVocab::pad_id);
  }

 private:
  void declare_ln(const std::string& prefix, std::size_t d) {
    neuro::declare_layer_norm(*store_, prefix, d);
  }

  std::size_t gat_in_width(std::size_t layer) const {
    return layer == 0 ? 2 * cfg_.bilstm_hidden : cfg_.gat_hidden * cfg_.gat_heads;
  }

  static std::vector<int> clipped(const std::vector<int>& ids, std::size_t cap) {
    return ids.size() <= cap ? ids : std::vector<int>(ids.begin(), ids.begin() + cap);
  }

  neuro::Value<T> embed(neuro::Tape<T>& tape, const std::vector<int>& ids,
                        const std::string& pos_name, std::size_t pos_cap) const {
    if (ids.size() > pos_cap) fail(Errc::shape_mismatch, "embed: sequence exceeds " + pos_name);
    auto tok = neuro::ops::rows_gather(neuro::param(tape, *store_, "embed.tok"), ids);
    tok = neuro::ops::scale(tok, static_cast<T>(std::sqrt(static_cast<double>(cfg_.model_dim))));
    std::vector<int> positions(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) positions[i] = static_cast<int>(i);
    auto pos = neuro::ops::rows_gather(neuro::param(tape, *store_, pos_name), positions);
    return neuro::ops::dropout(neuro::ops::add(tok, pos), cfg_.dropout);
  }

  neuro::Value<T> sublayer(neuro::Tape<T>& tape, const std::string& ln_prefix,
                           neuro::Value<T> x, neuro::Value<T> sub_out) const {
    auto sum = neuro::ops::add(x, neuro::ops::dropout(sub_out, cfg_.dropout));
    return neuro::layer_norm(tape, *store_, ln_prefix, sum);
  }

  neuro::Value<T> feed_forward(neuro::Tape<T>& tape, const std::string& prefix,
                               neuro::Value<T> x) const {
    auto h = neuro::ops::relu(neuro::linear(tape, *store_, prefix + ".ff.fc1", x));
    return neuro::linear(tape, *store_, prefix + ".ff.fc2", h);
  }

  FasumConfig cfg_;
  neuro::ParameterStore<T>* store_;
};

// ---------------------------------------------------------------------------
// Beam search
// ---------------------------------------------------------------------------

struct GenerationResult {
  std::vector<int> ids;               // generated content ids (no specials)
  std::string text;                   // detokenized
  std::vector<double> step_logprobs;  // one per emitted token, EOS included
  double score = 0.0;                 // length-normalized log-probability
};

namespace detail {

struct Hypothesis {
  std::vector<int> ids;
  std::vector<double> logps;
  double cum = 0.0;
  bool finished = false;

  double normalized(std::size_t extra_steps = 0) const {
    const auto steps = logps.size() + extra_steps;
    return steps == 0 ? 0.0 : cum / static_cast<double>(steps);
  }
};

// Trigrams are checked over content pieces only: whitespace pieces exist for
// exact detokenization and would otherwise turn every repeated word into a
// blocked "trigram".
inline bool repeats_trigram(const std::vector<int>& content_ids, int next) {
  if (content_ids.size() < 2) return false;
  const int a = content_ids[content_ids.size() - 2], b = content_ids[content_ids.size() - 1];
  for (std::size_t i = 0; i + 2 < content_ids.size(); ++i)
    if (content_ids[i] == a && content_ids[i + 1] == b && content_ids[i + 2] == next)
      return true;
  return false;
}

inline std::vector<char> whitespace_piece_table(const SubwordVocab& vocab) {
  std::vector<char> table(vocab.pieces.size(), 0);
  for (std::size_t i = SubwordVocab::special_count; i < vocab.pieces.size(); ++i) {
    const auto& p = vocab.pieces[i];
    bool all_space = !p.empty();
    for (char c : p)
      if (!textkit::detail::is_space(c)) all_space = false;
    table[i] = all_space ? 1 : 0;
  }
  return table;
}

inline std::vector<int> content_only(const std::vector<int>& ids,
                                     const std::vector<char>& space_piece) {
  std::vector<int> out;
  out.reserve(ids.size());
  for (int id : ids)
    if (!space_piece[static_cast<std::size_t>(id)]) out.push_back(id);
  return out;
}

}  // namespace detail

// Length-normalized beam search with minimum-length EOS masking and optional
// trigram blocking. Ties break toward the lower token id, then the earlier
// parent hypothesis. beam_width 1 reduces to greedy decoding.
template <typename T>
GenerationResult beam_search(const FasumModel<T>& model, const SubwordVocab& vocab,
                             const std::vector<int>& src_ids_raw,
                             const kgraph::KnowledgeGraph* graph, const FasumConfig& cfg) {
  if (src_ids_raw.empty()) fail(Errc::empty_article, "beam_search: empty input");
  std::vector<int> src_ids = src_ids_raw;
  if (src_ids.size() > cfg.max_article_len) src_ids.resize(cfg.max_article_len);

  // encode once; node embeddings are static across decoding steps
  neuro::Tensor<T> enc_out, node_emb;
  bool have_nodes = false;
  {
    neuro::Tape<T> tape;
    auto enc = model.encode(tape, src_ids);
    enc_out = enc.val();
    if (graph != nullptr) {
      auto ne = model.embed_graph(tape, *graph, vocab);
      if (ne.has_value()) {
        node_emb = ne->val();
        have_nodes = true;
      }
    }
  }

  const double ninf = -std::numeric_limits<double>::infinity();
  const auto space_piece = detail::whitespace_piece_table(vocab);
  std::vector<detail::Hypothesis> live(1);
  std::vector<detail::Hypothesis> finished;
  bool stopped_on_full_beam = false;

  for (std::size_t step = 0; step < cfg.max_summary_len && !live.empty(); ++step) {
    struct Candidate {
      double norm;
      std::size_t parent;
      int tok;
      double logp;
    };
    std::vector<Candidate> candidates;
    for (std::size_t pi = 0; pi < live.size(); ++pi) {
      const auto& hyp = live[pi];
      neuro::Tape<T> tape;
      auto enc = tape.leaf(enc_out);
      std::optional<neuro::Value<T>> nodes;
      if (have_nodes) nodes = tape.leaf(node_emb);
      std::vector<int> dec_in;
      dec_in.reserve(hyp.ids.size() + 1);
      dec_in.push_back(SubwordVocab::bos_id);
      dec_in.insert(dec_in.end(), hyp.ids.begin(), hyp.ids.end());
      auto lg = model.logits(tape, model.decoder_states(tape, enc, dec_in, nodes));
      auto logp = neuro::log_softmax_row(lg.val(), dec_in.size() - 1);

      logp[SubwordVocab::pad_id] = ninf;
      logp[SubwordVocab::bos_id] = ninf;
      logp[SubwordVocab::sep_id] = ninf;
      if (hyp.ids.size() < cfg.min_summary_len) logp[SubwordVocab::eos_id] = ninf;
      if (cfg.trigram_block) {
        const auto content = detail::content_only(hyp.ids, space_piece);
        for (std::size_t tok = 0; tok < logp.size(); ++tok)
          if (!space_piece[tok] && detail::repeats_trigram(content, static_cast<int>(tok)))
            logp[tok] = ninf;
      }

      for (std::size_t tok = 0; tok < logp.size(); ++tok) {
        if (logp[tok] == ninf) continue;
        const double cum = hyp.cum + logp[tok];
        candidates.push_back({cum / static_cast<double>(hyp.logps.size() + 1), pi,
                              static_cast<int>(tok), logp[tok]});
      }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      if (a.norm != b.norm) return a.norm > b.norm;
      if (a.tok != b.tok) return a.tok < b.tok;
      return a.parent < b.parent;
    });

    // An EOS candidate only finalizes from within the top beam_width ranks;
    // lower-ranked EOS never displaces a live continuation (this is what
    // makes beam_width = 1 coincide with the greedy argmax chain).
    std::vector<detail::Hypothesis> next_live;
    std::size_t rank = 0;
    for (const auto& c : candidates) {
      if (rank >= 2 * cfg.beam_width) break;
      if (c.tok == SubwordVocab::eos_id) {
        if (rank < cfg.beam_width) {
          detail::Hypothesis h = live[c.parent];
          h.cum += c.logp;
          h.logps.push_back(c.logp);
          h.finished = true;
          finished.push_back(std::move(h));
        }
      } else if (next_live.size() < cfg.beam_width) {
        detail::Hypothesis h = live[c.parent];
        h.cum += c.logp;
        h.logps.push_back(c.logp);
        h.ids.push_back(c.tok);
        next_live.push_back(std::move(h));
      }
      ++rank;
      if (next_live.size() >= cfg.beam_width && rank >= cfg.beam_width) break;
    }
    live = std::move(next_live);
    if (finished.size() >= cfg.beam_width) {
      stopped_on_full_beam = true;
      break;
    }
  }

  // length cap reached: force-finish the surviving hypotheses without EOS
  if (!stopped_on_full_beam)
    for (auto& h : live)
      if (!h.ids.empty()) finished.push_back(std::move(h));
  if (finished.empty()) return {};

  const auto best = std::max_element(
      finished.begin(), finished.end(), [](const detail::Hypothesis& a,
                                           const detail::Hypothesis& b) {
        const double an = a.normalized(), bn = b.normalized();
        if (an != bn) return an < bn;
        return b.ids < a.ids;  // prefer the lexicographically smaller sequence
      });

  GenerationResult out;
  out.ids = best->ids;
  out.step_logprobs = best->logps;
  out.score = best->normalized();
  out.text = textkit::decode(vocab, out.ids);
  return out;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainReport {
  std::vector<double> epoch_loss;
  std::vector<double> epoch_accuracy;
  std::vector<std::pair<std::size_t, double>> val_rouge_l;  // (epoch, score)
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
};

// Core seq2seq trainer shared by the summarizer, the corrector and the
// claim classifier's encoder. Seeded shuffling, gradient accumulation to
// batch_size, Adam with optional warmup/decay and clipping; optional
// validation ROUGE-L picks the best checkpoint.
template <typename T>
TrainReport train_seq2seq(FasumModel<T>& model, neuro::ParameterStore<T>& store,
                          const SubwordVocab& vocab, const std::vector<SeqExample>& examples,
                          const std::vector<SeqExample>& val_examples, const FasumConfig& cfg) {
  if (examples.empty()) fail(Errc::empty_dataset, "train: no examples");
  store.rng_seed = cfg.seed;
  neuro::Rng init_rng(cfg.seed);
  model.declare_params(init_rng);

  neuro::AdamState<T> adam;
  adam.lr = cfg.lr;
  adam.beta1 = cfg.adam_beta1;
  adam.beta2 = cfg.adam_beta2;
  adam.eps = cfg.adam_eps;

  const std::size_t steps_per_epoch =
      (examples.size() + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t total_steps = std::max<std::size_t>(1, cfg.epochs * steps_per_epoch);
  const std::size_t warmup_steps =
      static_cast<std::size_t>(cfg.warmup_frac * static_cast<double>(total_steps));
  std::size_t step_no = 0;
  auto lr_mult = [&]() {
    if (warmup_steps == 0) return 1.0;
    if (step_no < warmup_steps)
      return static_cast<double>(step_no + 1) / static_cast<double>(warmup_steps);
    const auto rest = total_steps - warmup_steps;
    return rest == 0 ? 1.0
                     : std::max(0.05, 1.0 - static_cast<double>(step_no - warmup_steps) /
                                                static_cast<double>(rest));
  };

  neuro::Rng dropout_rng(cfg.seed ^ 0x5bd1e995u);
  TrainReport report;
  double best_val = -1.0;
  neuro::ParameterStore<T> best_params;

  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    neuro::Rng shuffle_rng(cfg.seed * 1000003ull + epoch);
    shuffle_rng.shuffle(order.begin(), order.end());

    double loss_sum = 0.0, acc_sum = 0.0;
    store.zero_grads();
    std::size_t in_batch = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      const auto& ex = examples[order[k]];
      neuro::Tape<T> tape;
      tape.training = true;
      tape.rng = &dropout_rng;
      double acc = 0.0;
      auto loss = model.forward_teacher_forced(tape, ex, vocab, &acc);
      loss_sum += static_cast<double>(loss.val().data[0]);
      acc_sum += acc;
      tape.backward(loss);
      const std::size_t batch_n = std::min(cfg.batch_size, order.size() - (k - in_batch));
      neuro::harvest_grads(tape, store, static_cast<T>(1.0 / static_cast<double>(batch_n)));
      ++in_batch;
      if (in_batch == cfg.batch_size || k + 1 == order.size()) {
        if (cfg.grad_clip > 0) neuro::clip_grad_norm(store, cfg.grad_clip);
        neuro::adam_step(store, adam, lr_mult());
        ++step_no;
        store.zero_grads();
        in_batch = 0;
      }
    }
    report.epoch_loss.push_back(loss_sum / static_cast<double>(examples.size()));
    report.epoch_accuracy.push_back(acc_sum / static_cast<double>(examples.size()));
    report.epochs_run = epoch + 1;

    const bool last = epoch + 1 == cfg.epochs;
    const bool early =
        (cfg.stop_train_acc > 0 && report.epoch_accuracy.back() >= cfg.stop_train_acc) ||
        (cfg.stop_train_loss > 0 && report.epoch_loss.back() <= cfg.stop_train_loss);
    if (!val_examples.empty() && cfg.val_every > 0 &&
        ((epoch + 1) % cfg.val_every == 0 || last || early)) {
      double rl = 0.0;
      for (const auto& vex : val_examples) {
        const auto gen = beam_search(model, vocab, vex.src_ids,
                                     vex.has_graph ? &vex.graph : nullptr, cfg);
        rl += metrics::rouge_f1(gen.text, vex.tgt_text, metrics::RougeVariant::RL);
      }
      rl /= static_cast<double>(val_examples.size());
      report.val_rouge_l.emplace_back(epoch + 1, rl);
      if (rl > best_val) {
        best_val = rl;
        report.best_epoch = epoch + 1;
        best_params = store;
      }
    }
    if (early) break;
  }

  // restore the checkpoint that scored best on validation
  if (!report.val_rouge_l.empty() && best_val >= 0 && !best_params.empty()) {
    for (auto& [name, t] : best_params) store.at(name).data = t.data;
  } else {
    report.best_epoch = report.epochs_run;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Summarizer-specific glue
// ---------------------------------------------------------------------------

inline SeqExample make_summarizer_example(const data::DocumentPair& pair,
                                          const SubwordVocab& vocab, const FasumConfig& cfg) {
  SeqExample ex;
  ex.src_ids = encode_text(vocab, pair.article, cfg.lowercase);
  ex.tgt_ids = encode_text(vocab, pair.summary, cfg.lowercase);
  ex.tgt_text = cfg.lowercase ? textkit::detail::lower(pair.summary) : pair.summary;
  if (cfg.use_kg) {
    ex.graph = kgraph::build_graph(openie::extract_document(pair.article, pair.id));
    ex.has_graph = true;
  }
  return ex;
}

template <typename T>
TrainReport train_fasum(const std::vector<data::DocumentPair>& pairs,
                        const std::vector<data::DocumentPair>& val_pairs,
                        const SubwordVocab& vocab, const FasumConfig& cfg,
                        neuro::ParameterStore<T>& store) {
  if (pairs.empty()) fail(Errc::empty_dataset, "train_fasum: empty dataset");
  std::vector<SeqExample> examples, val;
  examples.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (p.summary.empty()) fail(Errc::empty_summary, "train_fasum: pair " + p.id);
    examples.push_back(make_summarizer_example(p, vocab, cfg));
  }
  for (const auto& p : val_pairs) val.push_back(make_summarizer_example(p, vocab, cfg));
  FasumModel<T> model(cfg, store);
  return train_seq2seq(model, store, vocab, examples, val, cfg);
}

template <typename T>
GenerationResult summarize(const data::DocumentPair& pair, const SubwordVocab& vocab,
                           const FasumConfig& cfg, neuro::ParameterStore<T>& store) {
  FasumModel<T> model(cfg, store);
  const auto src = encode_text(vocab, pair.article, cfg.lowercase);
  if (src.empty()) fail(Errc::empty_article, "summarize: article produced no tokens");
  std::vector<int> clipped_src = src;
  if (clipped_src.size() > cfg.max_article_len) clipped_src.resize(cfg.max_article_len);
  kgraph::KnowledgeGraph graph;
  if (cfg.use_kg) graph = kgraph::build_graph(openie::extract_document(pair.article, pair.id));
  return beam_search(model, vocab, clipped_src, cfg.use_kg ? &graph : nullptr, cfg);
}

}  // namespace factsum::fasum
