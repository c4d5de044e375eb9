#pragma once

// Command-line surface: extract, graph, train, summarize, correct, forge,
// factcc-train and evaluate subcommands composed from the library modules.
// All randomness flows from --seed; document-parallel stages use a worker
// pool capped by FACTSUM_THREADS, with outputs ordered by input order.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "factsum/config.hpp"
#include "factsum/data.hpp"
#include "factsum/factcc.hpp"
#include "factsum/fasum.hpp"
#include "factsum/fc.hpp"
#include "factsum/kgraph.hpp"
#include "factsum/metrics.hpp"
#include "factsum/openie.hpp"

namespace factsum::cli {

using nlohmann::ordered_json;

inline std::size_t worker_count(std::size_t items) {
  std::size_t hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("FACTSUM_THREADS")) {
    char* end = nullptr;
    const auto parsed = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && parsed > 0) hw = std::min<std::size_t>(hw, parsed);
  }
  return std::max<std::size_t>(1, std::min(hw, items));
}

// Runs fn(0..n-1) on a small pool; results must be written to per-index
// slots so output order never depends on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const auto workers = worker_count(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// Shared file helpers
// ---------------------------------------------------------------------------

namespace detail {

inline openie::TupleSet tuples_to_set(const ordered_json& j) {
  openie::TupleSet set;
  set.doc_id = j.at("id").get<std::string>();
  for (const auto& t : j.at("tuples")) {
    openie::RelationTuple rt;
    rt.subject = t.at("s").get<std::string>();
    rt.relation = t.at("r").get<std::string>();
    rt.object = t.at("o").get<std::string>();
    rt.sentence_index = t.at("sent").get<std::size_t>();
    set.tuples.push_back(std::move(rt));
  }
  return set;
}

inline ordered_json tuple_set_to_json(const openie::TupleSet& set) {
  ordered_json j;
  j["id"] = set.doc_id;
  j["tuples"] = ordered_json::array();
  for (const auto& t : set.tuples)
    j["tuples"].push_back(
        {{"s", t.subject}, {"r", t.relation}, {"o", t.object}, {"sent", t.sentence_index}});
  return j;
}

inline std::vector<openie::TupleSet> load_tuple_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(Errc::file_not_found, "cannot open tuple file " + path.string());
  std::vector<openie::TupleSet> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto j = ordered_json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("id") || !j.contains("tuples"))
      fail(Errc::malformed_line,
           path.string() + ":" + std::to_string(line_no) + ": bad tuple line");
    out.push_back(tuples_to_set(j));
  }
  return out;
}

inline std::string vocab_to_string(const textkit::SubwordVocab& vocab) {
  std::ostringstream os;
  textkit::save_vocab(vocab, os);
  return os.str();
}

inline textkit::SubwordVocab load_vocab_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(Errc::file_not_found, "cannot open vocab " + path.string());
  return textkit::load_vocab(is);
}

struct LoadedModel {
  FasumConfig cfg;
  textkit::SubwordVocab vocab;
  neuro::ParameterStore<float> store;
};

inline LoadedModel load_model_dir(const std::filesystem::path& dir) {
  LoadedModel m;
  const auto echo = neuro::load_checkpoint(dir / "checkpoint.bin", m.store);
  m.cfg = parse_config_echo(echo);
  m.vocab = load_vocab_file(dir / "vocab.bpe");
  return m;
}

inline textkit::SubwordVocab train_vocab(const std::vector<data::DocumentPair>& pairs,
                                         const FasumConfig& cfg) {
  std::vector<std::string> corpus;
  corpus.reserve(pairs.size() * 2);
  for (const auto& p : pairs) {
    corpus.push_back(cfg.lowercase ? textkit::detail::lower(p.article) : p.article);
    if (!p.summary.empty())
      corpus.push_back(cfg.lowercase ? textkit::detail::lower(p.summary) : p.summary);
  }
  return textkit::train_bpe(corpus, cfg.vocab_size);
}

inline ordered_json train_report_json(const fasum::TrainReport& report) {
  ordered_json j;
  j["epoch_loss"] = report.epoch_loss;
  j["epoch_accuracy"] = report.epoch_accuracy;
  j["val_rouge_l"] = ordered_json::array();
  for (const auto& [epoch, score] : report.val_rouge_l)
    j["val_rouge_l"].push_back({{"epoch", epoch}, {"rougeL", score}});
  j["best_epoch"] = report.best_epoch;
  j["epochs_run"] = report.epochs_run;
  return j;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Evaluation report
// ---------------------------------------------------------------------------

struct EvalReport {
  std::optional<double> rouge1, rouge2, rouge_l;
  std::optional<double> rmr1, rmr2;
  metrics::HitCounts hits;
  std::optional<double> novel_ngrams[4];  // n = 1..4
  std::optional<double> factual_score;
};

namespace detail {

inline ordered_json opt_json(const std::optional<double>& v) {
  return v.has_value() ? ordered_json(*v) : ordered_json(nullptr);
}

inline ordered_json eval_report_json(const EvalReport& r) {
  ordered_json j;
  j["rouge1"] = opt_json(r.rouge1);
  j["rouge2"] = opt_json(r.rouge2);
  j["rougeL"] = opt_json(r.rouge_l);
  j["rmr1"] = opt_json(r.rmr1);
  j["rmr2"] = opt_json(r.rmr2);
  j["hits"] = {{"C", r.hits.correct}, {"W", r.hits.wrong}, {"M", r.hits.miss}};
  j["novel_ngrams"] = ordered_json::object();
  for (int n = 1; n <= 4; ++n)
    j["novel_ngrams"][std::to_string(n)] = opt_json(r.novel_ngrams[n - 1]);
  j["factual_score"] = opt_json(r.factual_score);
  return j;
}

}  // namespace detail

// Per-document metrics for one (article, reference, prediction) triple.
inline EvalReport evaluate_document(const std::string& article, const std::string& reference,
                                    const std::string& prediction,
                                    const metrics::ClaimScorer* scorer) {
  EvalReport r;
  if (!reference.empty()) {
    r.rouge1 = metrics::rouge_f1(prediction, reference, metrics::RougeVariant::R1);
    r.rouge2 = metrics::rouge_f1(prediction, reference, metrics::RougeVariant::R2);
    r.rouge_l = metrics::rouge_f1(prediction, reference, metrics::RougeVariant::RL);
  }
  const auto article_tuples = openie::extract_document(article);
  const auto summary_tuples = openie::extract_document(prediction);
  const auto rm = metrics::rmr(summary_tuples, article_tuples);
  r.rmr1 = rm.rmr1;
  r.rmr2 = rm.rmr2;
  r.hits = rm.hits;
  for (std::size_t n = 1; n <= 4; ++n)
    r.novel_ngrams[n - 1] = metrics::novel_ngram_ratio(prediction, article, n);
  if (scorer && !textkit::split_sentences(prediction).empty())
    r.factual_score = metrics::factual_score(article, prediction, *scorer);
  return r;
}

// Aggregate = arithmetic mean over documents where the value is present;
// hit counts are summed.
inline EvalReport aggregate_reports(const std::vector<EvalReport>& docs) {
  EvalReport agg;
  auto mean_of = [&docs](auto getter) -> std::optional<double> {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& d : docs) {
      const auto v = getter(d);
      if (v.has_value()) {
        sum += *v;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  };
  agg.rouge1 = mean_of([](const EvalReport& d) { return d.rouge1; });
  agg.rouge2 = mean_of([](const EvalReport& d) { return d.rouge2; });
  agg.rouge_l = mean_of([](const EvalReport& d) { return d.rouge_l; });
  agg.rmr1 = mean_of([](const EvalReport& d) { return d.rmr1; });
  agg.rmr2 = mean_of([](const EvalReport& d) { return d.rmr2; });
  for (int n = 0; n < 4; ++n)
    agg.novel_ngrams[n] =
        mean_of([n](const EvalReport& d) { return d.novel_ngrams[n]; });
  agg.factual_score = mean_of([](const EvalReport& d) { return d.factual_score; });
  for (const auto& d : docs) {
    agg.hits.correct += d.hits.correct;
    agg.hits.wrong += d.hits.wrong;
    agg.hits.miss += d.hits.miss;
  }
  return agg;
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

namespace detail {

inline void cmd_extract(const std::filesystem::path& data_path,
                        const std::filesystem::path& out_path) {
  const auto ds = data::load_dataset(data_path);
  std::vector<std::string> lines(ds.pairs.size());
  parallel_for(ds.pairs.size(), [&](std::size_t i) {
    const auto set = openie::extract_document(ds.pairs[i].article, ds.pairs[i].id);
    lines[i] = tuple_set_to_json(set).dump();
  });
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  data::atomic_write(out_path, out);
}

inline void cmd_graph(const std::filesystem::path& tuples_path, const std::string& doc_id,
                      const std::filesystem::path& out_path) {
  const auto sets = load_tuple_file(tuples_path);
  if (sets.empty()) fail(Errc::empty_dataset, "tuple file has no documents");
  const openie::TupleSet* chosen = &sets.front();
  if (!doc_id.empty()) {
    chosen = nullptr;
    for (const auto& s : sets)
      if (s.doc_id == doc_id) chosen = &s;
    if (!chosen) fail(Errc::config_invalid, "no document with id " + doc_id);
  }
  const auto graph = kgraph::build_graph(*chosen);
  ordered_json j;
  j["nodes"] = ordered_json::array();
  for (const auto& n : graph.nodes)
    j["nodes"].push_back({{"id", n.id},
                          {"text", n.text},
                          {"kind", n.kind == kgraph::NodeKind::Entity ? "entity" : "relation"}});
  j["edges"] = ordered_json::array();
  for (const auto& [a, b] : graph.edges) j["edges"].push_back({a, b});
  data::atomic_write(out_path, j.dump(2) + "\n");
}

inline fc::FcDataset load_forge_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(Errc::file_not_found, "cannot open forge file " + path.string());
  fc::FcDataset ds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto j = ordered_json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("article") || !j.contains("clean") ||
        !j.contains("corrupted") || !j.contains("transform"))
      fail(Errc::malformed_line,
           path.string() + ":" + std::to_string(line_no) + ": bad forge line");
    fc::CorruptionSample s;
    s.article = j.at("article").get<std::string>();
    s.clean_summary = j.at("clean").get<std::string>();
    s.corrupted_summary = j.at("corrupted").get<std::string>();
    const auto tr = fc::transform_from_name(j.at("transform").get<std::string>());
    if (!tr)
      fail(Errc::malformed_line,
           path.string() + ":" + std::to_string(line_no) + ": unknown transform");
    s.transform = *tr;
    if (j.contains("swap") && j.at("swap").is_array() && j.at("swap").size() == 2)
      s.swap = {{j.at("swap")[0].get<std::string>(), j.at("swap")[1].get<std::string>()}};
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

inline void cmd_forge(const std::filesystem::path& data_path,
                      const std::filesystem::path& out_path, std::size_t per_pair,
                      const std::string& transforms_csv, std::uint64_t seed) {
  const auto ds = data::load_dataset(data_path);
  std::vector<fc::Transform> transforms;
  if (!transforms_csv.empty()) {
    std::size_t b = 0;
    while (b <= transforms_csv.size()) {
      auto e = transforms_csv.find(',', b);
      if (e == std::string::npos) e = transforms_csv.size();
      const auto name = transforms_csv.substr(b, e - b);
      const auto tr = fc::transform_from_name(name);
      if (!tr) fail(Errc::config_invalid, "unknown transform: " + name);
      transforms.push_back(*tr);
      b = e + 1;
    }
  }
  const auto forged = fc::make_fc_dataset(ds.pairs, per_pair, transforms, seed);
  std::string out;
  for (const auto& s : forged.samples) {
    ordered_json j;
    j["article"] = s.article;
    j["clean"] = s.clean_summary;
    j["corrupted"] = s.corrupted_summary;
    j["transform"] = fc::transform_name(s.transform);
    if (s.swap.has_value())
      j["swap"] = {s.swap->first, s.swap->second};
    else
      j["swap"] = nullptr;
    out += j.dump() + "\n";
  }
  data::atomic_write(out_path, out);
  std::cout << "forged " << forged.samples.size() << " samples (" << forged.skipped
            << " skips)\n";
}

inline void cmd_train(const std::filesystem::path& data_path,
                      const std::filesystem::path& val_path, const std::string& which,
                      const std::filesystem::path& forge_path,
                      const std::filesystem::path& outdir, FasumConfig cfg) {
  std::filesystem::create_directories(outdir);
  fasum::TrainReport report;
  if (which == "fasum") {
    const auto ds = data::load_dataset(data_path);
    std::vector<data::DocumentPair> val;
    if (!val_path.empty()) val = data::load_dataset(val_path).pairs;
    const auto vocab = train_vocab(ds.pairs, cfg);
    cfg.vocab_size = vocab.size();  // merges may exhaust below the target
    neuro::ParameterStore<float> store;
    report = fasum::train_fasum(ds.pairs, val, vocab, cfg, store);
    data::atomic_write(outdir / "vocab.bpe", vocab_to_string(vocab));
    neuro::save_checkpoint(outdir / "checkpoint.bin", store, serialize_config(cfg));
  } else if (which == "fc") {
    if (forge_path.empty())
      fail(Errc::config_invalid, "train --model fc requires --forge FILE");
    const auto forged = load_forge_file(forge_path);
    std::vector<data::DocumentPair> vocab_pairs;
    for (const auto& s : forged.samples)
      vocab_pairs.push_back({"", s.article, s.clean_summary});
    const auto vocab = train_vocab(vocab_pairs, cfg);
    cfg.vocab_size = vocab.size();
    neuro::ParameterStore<float> store;
    report = fc::train_corrector(forged, vocab, cfg, store);
    data::atomic_write(outdir / "vocab.bpe", vocab_to_string(vocab));
    neuro::save_checkpoint(outdir / "checkpoint.bin", store,
                           serialize_config(fc::corrector_config(cfg)));
  } else {
    fail(Errc::config_invalid, "unknown --model: " + which + " (expected fasum or fc)");
  }
  data::atomic_write(outdir / "loss_curve.json", train_report_json(report).dump(2) + "\n");
}

inline void cmd_summarize(const std::filesystem::path& data_path,
                          const std::filesystem::path& model_dir,
                          const std::filesystem::path& out_path,
                          const std::optional<std::uint64_t>& seed_override) {
  auto model = load_model_dir(model_dir);
  if (seed_override) model.cfg.seed = *seed_override;
  const auto ds = data::load_dataset(data_path);
  std::vector<std::string> lines(ds.pairs.size());
  parallel_for(ds.pairs.size(), [&](std::size_t i) {
    const auto gen = fasum::summarize(ds.pairs[i], model.vocab, model.cfg, model.store);
    ordered_json j;
    j["id"] = ds.pairs[i].id;
    j["summary"] = gen.text;
    j["score"] = gen.score;
    lines[i] = j.dump();
  });
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  data::atomic_write(out_path, out);
}

inline void cmd_correct(const std::filesystem::path& data_path,
                        const std::filesystem::path& preds_path,
                        const std::filesystem::path& model_dir,
                        const std::filesystem::path& out_path) {
  auto model = load_model_dir(model_dir);
  const auto ds = data::load_dataset(data_path);
  const auto preds = data::load_predictions(preds_path);
  std::vector<std::string> lines(ds.pairs.size());
  parallel_for(ds.pairs.size(), [&](std::size_t i) {
    const auto it = preds.find(ds.pairs[i].id);
    if (it == preds.end())
      fail(Errc::config_invalid, "no prediction for id " + ds.pairs[i].id);
    const auto res =
        fc::correct(it->second, ds.pairs[i].article, model.vocab, model.cfg, model.store);
    ordered_json j;
    j["id"] = ds.pairs[i].id;
    j["summary"] = res.corrected;
    j["changed_tokens"] = res.changed_tokens;
    j["diff"] = ordered_json::array();
    for (const auto& op : res.diff) {
      const char* kind = op.kind == fc::DiffOp::Kind::Replace
                             ? "replace"
                             : op.kind == fc::DiffOp::Kind::Insert ? "insert" : "delete";
      j["diff"].push_back({{"op", kind}, {"before", op.before}, {"after", op.after}});
    }
    lines[i] = j.dump();
  });
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  data::atomic_write(out_path, out);
}

inline void cmd_factcc_train(const std::filesystem::path& data_path,
                             const std::filesystem::path& outdir, FasumConfig cfg) {
  std::filesystem::create_directories(outdir);
  const auto ds = data::load_dataset(data_path);
  const auto vocab = train_vocab(ds.pairs, cfg);
  cfg.vocab_size = vocab.size();
  const auto examples = metrics::make_factcc_data(ds.pairs, cfg.seed);
  neuro::ParameterStore<float> store;
  const auto report = metrics::train_factcc(examples, vocab, cfg, store);
  data::atomic_write(outdir / "vocab.bpe", vocab_to_string(vocab));
  neuro::save_checkpoint(outdir / "checkpoint.bin", store, serialize_config(cfg));
  ordered_json j;
  j["epoch_loss"] = report.epoch_loss;
  j["heldout_accuracy"] = report.heldout_accuracy;
  j["heldout_auc"] = report.heldout_auc;
  j["heldout_count"] = report.heldout_count;
  data::atomic_write(outdir / "metrics.json", j.dump(2) + "\n");
}

inline void cmd_evaluate(const std::filesystem::path& data_path,
                         const std::filesystem::path& preds_path,
                         const std::filesystem::path& factcc_dir,
                         const std::filesystem::path& outdir) {
  std::filesystem::create_directories(outdir);
  const auto ds = data::load_dataset(data_path);
  const auto preds = data::load_predictions(preds_path);

  std::optional<LoadedModel> clf_model;
  std::optional<metrics::ClaimClassifier<float>> clf;
  metrics::ClaimScorer scorer;
  if (!factcc_dir.empty()) {
    clf_model = load_model_dir(factcc_dir);
    clf.emplace(clf_model->cfg, clf_model->store);
    scorer = [&](const std::string& article, const std::string& claim) {
      return clf->score(clf_model->vocab, article, claim);
    };
  }

  std::vector<EvalReport> docs(ds.pairs.size());
  parallel_for(ds.pairs.size(), [&](std::size_t i) {
    const auto it = preds.find(ds.pairs[i].id);
    if (it == preds.end())
      fail(Errc::config_invalid, "no prediction for id " + ds.pairs[i].id);
    docs[i] = evaluate_document(ds.pairs[i].article, ds.pairs[i].summary, it->second,
                                clf ? &scorer : nullptr);
  });

  ordered_json j;
  j["aggregate"] = eval_report_json(aggregate_reports(docs));
  j["documents"] = ordered_json::array();
  for (std::size_t i = 0; i < docs.size(); ++i) {
    auto d = eval_report_json(docs[i]);
    d["id"] = ds.pairs[i].id;
    j["documents"].push_back(std::move(d));
  }
  data::atomic_write(outdir / "report.json", j.dump(2) + "\n");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

inline int run(const std::vector<std::string>& args) {
  CLI::App app{"fact-aware summarization toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand name

  std::string config_path, preset;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "config file (key = value lines)")
      ->expected(1);
  app.add_option("--preset", preset, "named preset: desk, paper-cnndm, paper-xsum");
  std::uint64_t seed_raw = 0;
  auto* seed_opt = app.add_option("--seed", seed_raw, "seed for all randomness");

  std::string data_path, val_path, out_path, outdir, tuples_path, doc_id, model_dir,
      preds_path, forge_path, which_model = "fasum", transforms_csv, factcc_dir;
  std::size_t per_pair = 2;

  auto* extract = app.add_subcommand("extract", "extract relation tuples per document");
  extract->add_option("--data", data_path, "dataset JSONL")->required();
  extract->add_option("--out", out_path, "output tuple JSONL")->required();

  auto* graph = app.add_subcommand("graph", "dump the knowledge graph of one document");
  graph->add_option("--tuples", tuples_path, "tuple JSONL from extract")->required();
  graph->add_option("--id", doc_id, "document id (default: first)");
  graph->add_option("--out", out_path, "output graph JSON")->required();

  auto* train = app.add_subcommand("train", "train the summarizer or the corrector");
  train->add_option("--data", data_path, "training dataset JSONL");
  train->add_option("--val", val_path, "validation dataset JSONL");
  train->add_option("--model", which_model, "fasum (default) or fc");
  train->add_option("--forge", forge_path, "forge JSONL (for --model fc)");
  train->add_option("--outdir", outdir, "output directory")->required();

  auto* summarize = app.add_subcommand("summarize", "generate summaries with a checkpoint");
  summarize->add_option("--data", data_path, "dataset JSONL")->required();
  summarize->add_option("--model", model_dir, "model directory from train")->required();
  summarize->add_option("--out", out_path, "predictions JSONL")->required();

  auto* correct = app.add_subcommand("correct", "correct candidate summaries");
  correct->add_option("--data", data_path, "dataset JSONL")->required();
  correct->add_option("--preds", preds_path, "candidate predictions JSONL")->required();
  correct->add_option("--model", model_dir, "corrector model directory")->required();
  correct->add_option("--out", out_path, "corrected predictions JSONL")->required();

  auto* forge = app.add_subcommand("forge", "make synthetic corruption data");
  forge->add_option("--data", data_path, "dataset JSONL")->required();
  forge->add_option("--out", out_path, "forge JSONL")->required();
  forge->add_option("--per-pair", per_pair, "corruptions per pair (default 2)");
  forge->add_option("--transforms", transforms_csv,
                    "comma list: entity_swap,pronoun_swap,negation,paraphrase_stub");

  auto* factcc_train = app.add_subcommand("factcc-train", "train the claim classifier");
  factcc_train->add_option("--data", data_path, "dataset JSONL")->required();
  factcc_train->add_option("--outdir", outdir, "output directory")->required();

  auto* evaluate = app.add_subcommand("evaluate", "score predictions against the dataset");
  evaluate->add_option("--data", data_path, "dataset JSONL")->required();
  evaluate->add_option("--preds", preds_path, "predictions JSONL")->required();
  evaluate->add_option("--factcc", factcc_dir, "claim classifier directory (optional)");
  evaluate->add_option("--outdir", outdir, "output directory")->required();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return 1;
  }
  if (seed_opt->count() > 0) seed = seed_raw;

  try {
    FasumConfig cfg;
    if (!preset.empty()) apply_preset(cfg, preset);
    if (!config_path.empty())
      apply_config_map(cfg, parse_config_text(data::read_file(config_path)));
    if (seed) cfg.seed = *seed;
    cfg.validate();

    if (extract->parsed()) {
      detail::cmd_extract(data_path, out_path);
    } else if (graph->parsed()) {
      detail::cmd_graph(tuples_path, doc_id, out_path);
    } else if (train->parsed()) {
      detail::cmd_train(data_path, val_path, which_model, forge_path, outdir, cfg);
    } else if (summarize->parsed()) {
      detail::cmd_summarize(data_path, model_dir, out_path, seed);
    } else if (correct->parsed()) {
      detail::cmd_correct(data_path, preds_path, model_dir, out_path);
    } else if (forge->parsed()) {
      detail::cmd_forge(data_path, out_path, per_pair, transforms_csv, cfg.seed);
    } else if (factcc_train->parsed()) {
      detail::cmd_factcc_train(data_path, outdir, cfg);
    } else if (evaluate->parsed()) {
      detail::cmd_evaluate(data_path, preds_path, factcc_dir, outdir);
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case Errc::config_invalid:
      case Errc::unknown_subcommand:
      case Errc::file_not_found:
      case Errc::malformed_line:
      case Errc::duplicate_id:
      case Errc::empty_dataset:
      case Errc::empty_corpus:
        return 1;
      default:
        return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args);
}

}  // namespace factsum::cli
