#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "factsum/fasum.hpp"
#include "testutil.hpp"

using namespace factsum;
using namespace factsum::fasum;
using testutil::micro_config;
using testutil::toy_pairs;
using testutil::toy_vocab;

namespace {

struct Fixture {
  std::vector<data::DocumentPair> pairs = toy_pairs();
  textkit::SubwordVocab vocab = toy_vocab(pairs);
  FasumConfig cfg = micro_config(vocab.size());
};

std::vector<double> step1_distribution(FasumModel<double>& model,
                                       const textkit::SubwordVocab& vocab,
                                       const std::vector<int>& src,
                                       const kgraph::KnowledgeGraph* graph) {
  neuro::Tape<double> tape;
  auto enc = model.encode(tape, src);
  std::optional<neuro::Value<double>> nodes;
  if (graph) nodes = model.embed_graph(tape, *graph, vocab);
  auto lg = model.logits(tape, model.decoder_states(tape, enc, {textkit::SubwordVocab::bos_id},
                                                    nodes));
  auto lp = neuro::log_softmax_row(lg.val(), 0);
  for (auto& v : lp) v = std::exp(v);
  return lp;
}

}  // namespace

TEST_CASE("untrained model loss is close to ln(vocab)") {
  Fixture f;
  neuro::ParameterStore<double> store;
  FasumModel<double> model(f.cfg, store);
  neuro::Rng rng(5);
  model.declare_params(rng);

  const auto ex = make_summarizer_example(f.pairs[0], f.vocab, f.cfg);
  neuro::Tape<double> tape;
  auto loss = model.forward_teacher_forced(tape, ex, f.vocab);
  const double lnv = std::log(static_cast<double>(f.vocab.size()));
  CHECK(loss.val().data[0] == doctest::Approx(lnv).epsilon(0.10));
}

TEST_CASE("identical seeds give identical losses") {
  Fixture f;
  double vals[2];
  for (int run = 0; run < 2; ++run) {
    neuro::ParameterStore<double> store;
    FasumModel<double> model(f.cfg, store);
    neuro::Rng rng(99);
    model.declare_params(rng);
    const auto ex = make_summarizer_example(f.pairs[1], f.vocab, f.cfg);
    neuro::Tape<double> tape;
    vals[run] = model.forward_teacher_forced(tape, ex, f.vocab).val().data[0];
  }
  CHECK(vals[0] == vals[1]);
}

TEST_CASE("empty article and empty summary are rejected") {
  Fixture f;
  neuro::ParameterStore<double> store;
  FasumModel<double> model(f.cfg, store);
  neuro::Rng rng(5);
  model.declare_params(rng);
  SeqExample ex;
  ex.tgt_ids = {7};
  try {
    neuro::Tape<double> tape;
    model.forward_teacher_forced(tape, ex, f.vocab);
    FAIL("expected EmptyArticle");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_article);
  }
  ex.src_ids = {7};
  ex.tgt_ids = {};
  try {
    neuro::Tape<double> tape;
    model.forward_teacher_forced(tape, ex, f.vocab);
    FAIL("expected EmptySummary");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_summary);
  }
}

TEST_CASE("zeroed graph projection reproduces the empty-graph logits") {
  Fixture f;
  neuro::ParameterStore<double> store;
  FasumModel<double> model(f.cfg, store);
  neuro::Rng rng(7);
  model.declare_params(rng);

  const auto ex = make_summarizer_example(f.pairs[0], f.vocab, f.cfg);
  REQUIRE(ex.has_graph);
  REQUIRE(!ex.graph.empty());

  auto& w = store.at("kg.proj.w");
  auto& b = store.at("kg.proj.b");
  std::fill(w.data.begin(), w.data.end(), 0.0);
  std::fill(b.data.begin(), b.data.end(), 0.0);

  const auto with_graph = step1_distribution(model, f.vocab, ex.src_ids, &ex.graph);
  const auto without = step1_distribution(model, f.vocab, ex.src_ids, nullptr);
  REQUIRE(with_graph.size() == without.size());
  for (std::size_t i = 0; i < with_graph.size(); ++i)
    CHECK(std::abs(with_graph[i] - without[i]) < 1e-9);
}

TEST_CASE("embed_graph is permutation-equivariant") {
  Fixture f;
  neuro::ParameterStore<double> store;
  FasumModel<double> model(f.cfg, store);
  neuro::Rng rng(21);
  model.declare_params(rng);

  auto graph = kgraph::build_graph(openie::extract_document(f.pairs[0].article));
  REQUIRE(graph.node_count() >= 3);

  // reversed node order with relabeled ids and adjacency
  const auto n = graph.node_count();
  kgraph::KnowledgeGraph perm;
  perm.nodes.resize(n);
  perm.adjacency.resize(n);
  auto relabel = [&](int old) { return static_cast<int>(n) - 1 - old; };
  for (const auto& node : graph.nodes) {
    auto& dst = perm.nodes[static_cast<std::size_t>(relabel(node.id))];
    dst = node;
    dst.id = relabel(node.id);
  }
  for (const auto& [a, bb] : graph.edges) perm.edges.emplace_back(relabel(a), relabel(bb));
  for (std::size_t i = 0; i < n; ++i)
    for (int nb : graph.adjacency[i])
      perm.adjacency[static_cast<std::size_t>(relabel(static_cast<int>(i)))].push_back(
          relabel(nb));

  neuro::Tape<double> t1, t2;
  auto e1 = model.embed_graph(t1, graph, f.vocab);
  auto e2 = model.embed_graph(t2, perm, f.vocab);
  REQUIRE(e1.has_value());
  REQUIRE(e2.has_value());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < e1->val().cols(); ++j)
      CHECK(e1->val()(i, j) ==
            doctest::Approx(e2->val()(static_cast<std::size_t>(relabel(static_cast<int>(i))), j))
                .epsilon(1e-9));
}

TEST_CASE("output distribution is stable under graph node permutation") {
  Fixture f;
  neuro::ParameterStore<double> store;
  FasumModel<double> model(f.cfg, store);
  neuro::Rng rng(27);
  model.declare_params(rng);

  auto graph = kgraph::build_graph(openie::extract_document(f.pairs[4].article));
  REQUIRE(graph.node_count() >= 3);
  const auto n = graph.node_count();
  kgraph::KnowledgeGraph perm;
  perm.nodes.resize(n);
  perm.adjacency.resize(n);
  auto relabel = [&](int old) { return static_cast<int>(n) - 1 - old; };
  for (const auto& node : graph.nodes) {
    auto& dst = perm.nodes[static_cast<std::size_t>(relabel(node.id))];
    dst = node;
    dst.id = relabel(node.id);
  }
  for (const auto& [a, b] : graph.edges) perm.edges.emplace_back(relabel(a), relabel(b));
  for (std::size_t i = 0; i < n; ++i)
    for (int nb : graph.adjacency[i])
      perm.adjacency[static_cast<std::size_t>(relabel(static_cast<int>(i)))].push_back(
          relabel(nb));

  const auto src = encode_text(f.vocab, f.pairs[4].article, false);
  const auto p1 = step1_distribution(model, f.vocab, src, &graph);
  const auto p2 = step1_distribution(model, f.vocab, src, &perm);
  REQUIRE(p1.size() == p2.size());
  for (std::size_t i = 0; i < p1.size(); ++i) CHECK(std::abs(p1[i] - p2[i]) < 1e-6);
}

TEST_CASE("micro model passes the full forward+backward gradient check") {
  Fixture f;
  neuro::ParameterStore<double> store;
  FasumModel<double> model(f.cfg, store);
  neuro::Rng rng(31);
  model.declare_params(rng);

  const auto ex = make_summarizer_example(f.pairs[7], f.vocab, f.cfg);
  const auto err = testutil::store_grad_check<double>(
      store,
      [&](neuro::Tape<double>& tape) { return model.forward_teacher_forced(tape, ex, f.vocab); },
      4, 77, 3e-6);
  CHECK(err < 1e-4);
}

TEST_CASE("beam_width=1 equals greedy decoding") {
  Fixture f;
  neuro::ParameterStore<double> store;
  FasumModel<double> model(f.cfg, store);
  neuro::Rng rng(41);
  model.declare_params(rng);

  FasumConfig cfg = f.cfg;
  cfg.beam_width = 1;
  cfg.max_summary_len = 12;
  cfg.min_summary_len = 2;
  cfg.trigram_block = true;

  for (int which = 0; which < 4; ++which) {
    const auto ex = make_summarizer_example(f.pairs[static_cast<std::size_t>(which)], f.vocab,
                                            cfg);
    const auto beam = beam_search(model, f.vocab, ex.src_ids, &ex.graph, cfg);

    // independent greedy chain
    std::vector<int> greedy;
    neuro::Tensor<double> enc_out, node_emb;
    {
      neuro::Tape<double> tape;
      std::vector<int> src = ex.src_ids;
      if (src.size() > cfg.max_article_len) src.resize(cfg.max_article_len);
      enc_out = model.encode(tape, src).val();
      auto ne = model.embed_graph(tape, ex.graph, f.vocab);
      REQUIRE(ne.has_value());
      node_emb = ne->val();
    }
    const double ninf = -std::numeric_limits<double>::infinity();
    for (std::size_t step = 0; step < cfg.max_summary_len; ++step) {
      neuro::Tape<double> tape;
      auto enc = tape.leaf(enc_out);
      std::optional<neuro::Value<double>> nodes(tape.leaf(node_emb));
      std::vector<int> dec_in = {textkit::SubwordVocab::bos_id};
      dec_in.insert(dec_in.end(), greedy.begin(), greedy.end());
      auto lg = model.logits(tape, model.decoder_states(tape, enc, dec_in, nodes));
      auto lp = neuro::log_softmax_row(lg.val(), dec_in.size() - 1);
      lp[textkit::SubwordVocab::pad_id] = ninf;
      lp[textkit::SubwordVocab::bos_id] = ninf;
      lp[textkit::SubwordVocab::sep_id] = ninf;
      if (greedy.size() < cfg.min_summary_len) lp[textkit::SubwordVocab::eos_id] = ninf;
      const auto space_piece = fasum::detail::whitespace_piece_table(f.vocab);
      const auto content = fasum::detail::content_only(greedy, space_piece);
      for (std::size_t tok = 0; tok < lp.size(); ++tok)
        if (!space_piece[tok] && fasum::detail::repeats_trigram(content, static_cast<int>(tok)))
          lp[tok] = ninf;
      int best = 0;
      double best_v = ninf;
      for (std::size_t tok = 0; tok < lp.size(); ++tok)
        if (lp[tok] > best_v) {
          best_v = lp[tok];
          best = static_cast<int>(tok);
        }
      if (best == textkit::SubwordVocab::eos_id) break;
      greedy.push_back(best);
    }
    CHECK(beam.ids == greedy);
  }
}

TEST_CASE("generation respects length bounds and trigram blocking") {
  Fixture f;
  neuro::ParameterStore<double> store;
  FasumModel<double> model(f.cfg, store);
  neuro::Rng rng(51);
  model.declare_params(rng);

  FasumConfig cfg = f.cfg;
  cfg.beam_width = 3;
  cfg.min_summary_len = 4;
  cfg.max_summary_len = 10;
  cfg.trigram_block = true;

  for (const auto& pair : f.pairs) {
    const auto ex = make_summarizer_example(pair, f.vocab, cfg);
    const auto gen = beam_search(model, f.vocab, ex.src_ids, &ex.graph, cfg);
    CHECK(gen.ids.size() >= cfg.min_summary_len);
    CHECK(gen.ids.size() <= cfg.max_summary_len);
    // no duplicated content trigram anywhere in the output
    const auto content =
        fasum::detail::content_only(gen.ids, fasum::detail::whitespace_piece_table(f.vocab));
    std::set<std::tuple<int, int, int>> seen;
    bool dup = false;
    for (std::size_t i = 0; i + 2 < content.size(); ++i)
      if (!seen.insert({content[i], content[i + 1], content[i + 2]}).second) dup = true;
    CHECK(!dup);
    for (auto lp : gen.step_logprobs) CHECK(std::isfinite(lp));
  }
}

TEST_CASE("train: empty dataset is rejected and zero epochs keep the init") {
  Fixture f;
  neuro::ParameterStore<double> store;
  try {
    train_fasum<double>({}, {}, f.vocab, f.cfg, store);
    FAIL("expected EmptyDataset");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_dataset);
  }

  FasumConfig cfg = f.cfg;
  cfg.epochs = 0;
  neuro::ParameterStore<double> s1, s2;
  train_fasum(f.pairs, {}, f.vocab, cfg, s1);
  FasumModel<double> fresh(cfg, s2);
  neuro::Rng rng(cfg.seed);
  fresh.declare_params(rng);
  REQUIRE(s1.size() == s2.size());
  for (auto& [name, t] : s1) CHECK(t.data == s2.at(name).data);
}

TEST_CASE("train: loss decreases and same seed gives identical curves") {
  Fixture f;
  FasumConfig cfg = f.cfg;
  cfg.epochs = 5;
  cfg.batch_size = 4;
  cfg.lr = 1e-3;

  neuro::ParameterStore<double> s1;
  auto r1 = train_fasum(f.pairs, {}, f.vocab, cfg, s1);
  REQUIRE(r1.epoch_loss.size() == 5);
  for (std::size_t e = 1; e < r1.epoch_loss.size(); ++e)
    CHECK(r1.epoch_loss[e] <= r1.epoch_loss[e - 1] + 1e-3);

  neuro::ParameterStore<double> s2;
  auto r2 = train_fasum(f.pairs, {}, f.vocab, cfg, s2);
  CHECK(r1.epoch_loss == r2.epoch_loss);
  for (auto& [name, t] : s1) CHECK(t.data == s2.at(name).data);
}

TEST_CASE("config echo round-trips through the checkpoint") {
  Fixture f;
  neuro::ParameterStore<float> store;
  FasumModel<float> model(f.cfg, store);
  neuro::Rng rng(61);
  model.declare_params(rng);

  const auto dir = std::filesystem::temp_directory_path() / "factsum_test_ckpt";
  std::filesystem::create_directories(dir);
  const auto path = dir / "model.ckpt";
  neuro::save_checkpoint(path, store, serialize_config(f.cfg));

  neuro::ParameterStore<float> loaded;
  const auto echo = neuro::load_checkpoint(path, loaded);
  const auto cfg2 = parse_config_echo(echo);
  CHECK(cfg2.model_dim == f.cfg.model_dim);
  CHECK(cfg2.layers == f.cfg.layers);
  CHECK(loaded.size() == store.size());
  std::filesystem::remove_all(dir);
}
