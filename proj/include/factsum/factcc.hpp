#pragma once

// Claim-level factual consistency classifier: a transformer encoder over
// BOS + claim + SEP + article + EOS with a sigmoid head on the first
// position, trained on forge-generated positive/negative claims.

#include <algorithm>
#include <string>
#include <vector>

#include "factsum/fc.hpp"
#include "factsum/metrics.hpp"

namespace factsum::metrics {

struct FactccExample {
  std::string article;
  std::string claim;
  int label = 1;  // 1 = factually consistent with the article
};

// Positives are the reference summary sentences run through the paraphrase
// interface; negatives come from the forge transforms applied per sentence.
// Labels are balanced by seeded subsampling of the majority class.
inline std::vector<FactccExample> make_factcc_data(
    const std::vector<data::DocumentPair>& pairs, std::uint64_t seed,
    const fc::Paraphraser& paraphraser = fc::IdentityParaphraser{}) {
  std::vector<FactccExample> positives, negatives;
  neuro::Rng rng(seed);
  for (const auto& pair : pairs) {
    for (const auto& span : textkit::split_sentences(pair.summary)) {
      const std::string sentence = pair.summary.substr(span.begin, span.end - span.begin);
      positives.push_back({pair.article, paraphraser.paraphrase(sentence, rng), 1});
      if (auto s = fc::forge_entity_swap(sentence, pair.article, rng))
        negatives.push_back({pair.article, s->corrupted_summary, 0});
      if (auto s = fc::forge_negation(sentence, pair.article, rng))
        negatives.push_back({pair.article, s->corrupted_summary, 0});
      if (auto s = fc::forge_pronoun_swap(sentence, pair.article, rng))
        negatives.push_back({pair.article, s->corrupted_summary, 0});
    }
  }
  auto& majority = positives.size() > negatives.size() ? positives : negatives;
  const std::size_t keep = std::min(positives.size(), negatives.size());
  if (keep > 0 && majority.size() > keep) {
    rng.shuffle(majority.begin(), majority.end());
    majority.resize(keep);
  }
  std::vector<FactccExample> out;
  out.reserve(positives.size() + negatives.size());
  out.insert(out.end(), positives.begin(), positives.end());
  out.insert(out.end(), negatives.begin(), negatives.end());
  rng.shuffle(out.begin(), out.end());
  return out;
}

template <typename T>
class ClaimClassifier {
 public:
  ClaimClassifier(FasumConfig cfg, neuro::ParameterStore<T>& store)
      : cfg_(std::move(cfg)), model_(cfg_, store), store_(&store) {}

  const FasumConfig& config() const { return cfg_; }

  void declare_params(neuro::Rng& rng) {
    model_.declare_encoder_params(rng);
    neuro::declare_linear(*store_, rng, "cls.head", cfg_.model_dim, 1);
  }

  std::vector<int> input_ids(const textkit::SubwordVocab& vocab, const std::string& article,
                             const std::string& claim) const {
    return fc::build_correction_input(vocab, claim, article, cfg_.lowercase,
                                      cfg_.max_article_len);
  }

  neuro::Value<T> logit(neuro::Tape<T>& tape, const std::vector<int>& ids) const {
    auto enc = model_.encode(tape, ids);
    auto first = neuro::ops::slice_rows(enc, 0, 1);
    return neuro::linear(tape, *store_, "cls.head", first);
  }

  double score(const textkit::SubwordVocab& vocab, const std::string& article,
               const std::string& claim) const {
    neuro::Tape<T> tape;
    const auto z = static_cast<double>(logit(tape, input_ids(vocab, article, claim))
                                           .val()
                                           .data[0]);
    return 1.0 / (1.0 + std::exp(-z));
  }

  ClaimScorer scorer(const textkit::SubwordVocab& vocab) const {
    return [this, &vocab](const std::string& article, const std::string& claim) {
      return score(vocab, article, claim);
    };
  }

 private:
  FasumConfig cfg_;
  fasum::FasumModel<T> model_;
  neuro::ParameterStore<T>* store_;
};

struct FactccReport {
  std::vector<double> epoch_loss;
  double heldout_accuracy = 0.0;
  double heldout_auc = 0.0;
  std::size_t heldout_count = 0;
};

// Mann-Whitney AUC with average ranks for ties.
inline double auc_from_scores(const std::vector<std::pair<double, int>>& scored) {
  std::vector<std::pair<double, int>> s = scored;
  std::sort(s.begin(), s.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t n_pos = 0, n_neg = 0;
  for (const auto& [score, label] : s) (label == 1 ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0)
    fail(Errc::single_class_dataset, "auc: both labels required");
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t j = i;
    while (j < s.size() && s[j].first == s[i].first) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k)
      if (s[k].second == 1) rank_sum_pos += avg_rank;
    i = j;
  }
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

// Trains the claim classifier with a stratified held-out split and reports
// held-out accuracy and AUC alongside the loss curve.
template <typename T>
FactccReport train_factcc(const std::vector<FactccExample>& examples,
                          const textkit::SubwordVocab& vocab, const FasumConfig& cfg,
                          neuro::ParameterStore<T>& store, double heldout_frac = 0.25) {
  if (examples.empty()) fail(Errc::empty_dataset, "train_factcc: no examples");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < examples.size(); ++i)
    (examples[i].label == 1 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty())
    fail(Errc::single_class_dataset, "train_factcc: need both labels");

  neuro::Rng split_rng(cfg.seed ^ 0xfacade);
  split_rng.shuffle(pos.begin(), pos.end());
  split_rng.shuffle(neg.begin(), neg.end());
  const auto cut = [&](std::vector<std::size_t>& v) {
    const std::size_t h = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                        heldout_frac *
                                                        static_cast<double>(v.size())));
    std::vector<std::size_t> held(v.end() - static_cast<std::ptrdiff_t>(h), v.end());
    v.resize(v.size() - h);
    return held;
  };
  auto held_pos = cut(pos);
  auto held_neg = cut(neg);
  std::vector<std::size_t> train_idx = pos;
  train_idx.insert(train_idx.end(), neg.begin(), neg.end());
  std::vector<std::size_t> held_idx = held_pos;
  held_idx.insert(held_idx.end(), held_neg.begin(), held_neg.end());

  store.rng_seed = cfg.seed;
  neuro::Rng init_rng(cfg.seed);
  ClaimClassifier<T> clf(cfg, store);
  clf.declare_params(init_rng);

  // ids are fixed; cache them
  std::vector<std::vector<int>> ids(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i)
    ids[i] = clf.input_ids(vocab, examples[i].article, examples[i].claim);

  neuro::AdamState<T> adam;
  adam.lr = cfg.lr;
  adam.beta1 = cfg.adam_beta1;
  adam.beta2 = cfg.adam_beta2;
  adam.eps = cfg.adam_eps;
  neuro::Rng dropout_rng(cfg.seed ^ 0xd0d0);

  const std::size_t steps_per_epoch = (train_idx.size() + cfg.batch_size - 1) / cfg.batch_size;
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

  FactccReport report;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    neuro::Rng shuffle_rng(cfg.seed * 7919ull + epoch);
    shuffle_rng.shuffle(train_idx.begin(), train_idx.end());
    double loss_sum = 0.0;
    store.zero_grads();
    std::size_t in_batch = 0;
    for (std::size_t k = 0; k < train_idx.size(); ++k) {
      const auto i = train_idx[k];
      neuro::Tape<T> tape;
      tape.training = true;
      tape.rng = &dropout_rng;
      auto loss = neuro::ops::bce_with_logit(clf.logit(tape, ids[i]),
                                             static_cast<T>(examples[i].label));
      loss_sum += static_cast<double>(loss.val().data[0]);
      tape.backward(loss);
      const std::size_t batch_n = std::min(cfg.batch_size, train_idx.size() - (k - in_batch));
      neuro::harvest_grads(tape, store, static_cast<T>(1.0 / static_cast<double>(batch_n)));
      ++in_batch;
      if (in_batch == cfg.batch_size || k + 1 == train_idx.size()) {
        if (cfg.grad_clip > 0) neuro::clip_grad_norm(store, cfg.grad_clip);
        neuro::adam_step(store, adam, lr_mult());
        ++step_no;
        store.zero_grads();
        in_batch = 0;
      }
    }
    report.epoch_loss.push_back(loss_sum / static_cast<double>(train_idx.size()));
    if (cfg.stop_train_loss > 0 && report.epoch_loss.back() <= cfg.stop_train_loss) break;
  }

  std::vector<std::pair<double, int>> scored;
  std::size_t correct = 0;
  for (const auto i : held_idx) {
    const double p = clf.score(vocab, examples[i].article, examples[i].claim);
    scored.emplace_back(p, examples[i].label);
    if ((p > 0.5) == (examples[i].label == 1)) ++correct;
  }
  report.heldout_count = held_idx.size();
  report.heldout_accuracy =
      held_idx.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(held_idx.size());
  report.heldout_auc = auc_from_scores(scored);
  return report;
}

}  // namespace factsum::metrics
