#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "factsum/cli.hpp"
#include "testutil.hpp"

using namespace factsum;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("factsum_cli_" + std::to_string(neuro::Rng(std::random_device{}()).next_u64()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream os(p);
  os << content;
}

std::string slurp(const fs::path& p) { return data::read_file(p); }

void write_dataset(const fs::path& p, const std::vector<data::DocumentPair>& pairs) {
  std::string out;
  for (const auto& pair : pairs) {
    nlohmann::ordered_json j;
    j["id"] = pair.id;
    j["article"] = pair.article;
    j["summary"] = pair.summary;
    out += j.dump() + "\n";
  }
  write_file(p, out);
}

}  // namespace

TEST_CASE("load_dataset: validation failures carry line numbers") {
  TempDir tmp;
  const auto p = tmp.path / "bad.jsonl";

  write_file(p, "{\"id\": \"a\", \"article\": \"x\"}\nnot json\n");
  try {
    data::load_dataset(p);
    FAIL("expected MalformedLine");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::malformed_line);
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }

  write_file(p, "{\"id\": \"a\", \"summary\": \"no article\"}\n");
  try {
    data::load_dataset(p);
    FAIL("expected MalformedLine");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::malformed_line);
  }

  write_file(p, "{\"id\": \"a\", \"article\": \"x\"}\n{\"id\": \"a\", \"article\": \"y\"}\n");
  try {
    data::load_dataset(p);
    FAIL("expected DuplicateId");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::duplicate_id);
  }

  try {
    data::load_dataset(tmp.path / "absent.jsonl");
    FAIL("expected FileNotFound");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::file_not_found);
  }
}

TEST_CASE("load_dataset: empty file and stats") {
  TempDir tmp;
  const auto p = tmp.path / "empty.jsonl";
  write_file(p, "");
  auto ds = data::load_dataset(p);
  CHECK(ds.pairs.empty());
  CHECK(ds.stats.pair_count == 0);

  write_dataset(p, {{"one", "A small article.", "A summary."}});
  ds = data::load_dataset(p);
  CHECK(ds.stats.pair_count == 1);
  CHECK(ds.stats.article_token_total > 0);
}

TEST_CASE("config precedence: flags > file > preset > defaults") {
  FasumConfig cfg;
  apply_preset(cfg, "paper-cnndm");
  CHECK(cfg.layers == 10);
  CHECK(cfg.model_dim == 720);
  CHECK(cfg.min_summary_len == 56);

  // file overrides preset
  apply_config_map(cfg, parse_config_text("layers = 3\n# comment\nmodel_dim= 240\n"));
  CHECK(cfg.layers == 3);
  CHECK(cfg.model_dim == 240);
  CHECK(cfg.heads == 10);  // untouched preset value survives

  // unknown keys and malformed values are rejected
  CHECK_THROWS_AS(apply_config_key(cfg, "no_such_key", "1"), Error);
  CHECK_THROWS_AS(apply_config_key(cfg, "layers", "three"), Error);
  CHECK_THROWS_AS(apply_preset(cfg, "no-preset"), Error);
}

TEST_CASE("config text round trip via serialize/parse") {
  FasumConfig cfg;
  cfg.lr = 0.00035;
  cfg.layers = 7;
  cfg.trigram_block = false;
  const auto echo = serialize_config(cfg);
  const auto back = parse_config_echo(echo);
  CHECK(back.lr == cfg.lr);
  CHECK(back.layers == 7);
  CHECK(back.trigram_block == false);
}

TEST_CASE("cli: unknown subcommand and missing files exit 1") {
  CHECK(cli::run({"factsum", "definitely-not-a-subcommand"}) == 1);
  CHECK(cli::run({"factsum"}) == 1);
  CHECK(cli::run({"factsum", "extract", "--data", "/nonexistent/x.jsonl", "--out",
                  "/tmp/never.jsonl"}) == 1);
}

TEST_CASE("cli: extract then graph yields 3 nodes for a one-tuple document") {
  TempDir tmp;
  write_dataset(tmp.path / "d.jsonl", {{"doc", "John visited Paris.", ""}});
  CHECK(cli::run({"factsum", "extract", "--data", (tmp.path / "d.jsonl").string(), "--out",
                  (tmp.path / "t.jsonl").string()}) == 0);
  CHECK(cli::run({"factsum", "graph", "--tuples", (tmp.path / "t.jsonl").string(), "--out",
                  (tmp.path / "g.json").string()}) == 0);
  const auto j = nlohmann::json::parse(slurp(tmp.path / "g.json"));
  CHECK(j["nodes"].size() == 3);
  CHECK(j["edges"].size() == 2);
}

TEST_CASE("cli: evaluate on identical predictions gives aggregate rouge1 = 1") {
  TempDir tmp;
  auto pairs = testutil::toy_pairs();
  pairs.resize(3);
  write_dataset(tmp.path / "d.jsonl", pairs);
  std::string preds;
  for (const auto& p : pairs) {
    nlohmann::ordered_json j;
    j["id"] = p.id;
    j["summary"] = p.summary;
    preds += j.dump() + "\n";
  }
  write_file(tmp.path / "p.jsonl", preds);
  CHECK(cli::run({"factsum", "evaluate", "--data", (tmp.path / "d.jsonl").string(), "--preds",
                  (tmp.path / "p.jsonl").string(), "--outdir",
                  (tmp.path / "out").string()}) == 0);
  const auto j = nlohmann::json::parse(slurp(tmp.path / "out" / "report.json"));
  CHECK(j["aggregate"]["rouge1"].get<double>() == doctest::Approx(1.0));
  CHECK(j["documents"].size() == 3);
  CHECK(j["aggregate"]["factual_score"].is_null());

  // aggregate metric values equal the mean of the per-document values
  for (const char* key : {"rouge1", "rouge2", "rougeL", "rmr1", "rmr2"}) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& d : j["documents"]) {
      if (d[key].is_null()) continue;
      sum += d[key].get<double>();
      ++n;
    }
    if (n == 0) {
      CHECK(j["aggregate"][key].is_null());
    } else {
      CHECK(j["aggregate"][key].get<double>() == doctest::Approx(sum / double(n)));
    }
  }
}

TEST_CASE("cli: evaluate twice produces byte-identical reports") {
  TempDir tmp;
  auto pairs = testutil::toy_pairs();
  pairs.resize(4);
  write_dataset(tmp.path / "d.jsonl", pairs);
  std::string preds;
  for (const auto& p : pairs) {
    nlohmann::ordered_json j;
    j["id"] = p.id;
    j["summary"] = "Someone scored twice on Sunday.";
    preds += j.dump() + "\n";
  }
  write_file(tmp.path / "p.jsonl", preds);
  for (const char* out : {"o1", "o2"})
    CHECK(cli::run({"factsum", "evaluate", "--data", (tmp.path / "d.jsonl").string(),
                    "--preds", (tmp.path / "p.jsonl").string(), "--outdir",
                    (tmp.path / out).string()}) == 0);
  CHECK(slurp(tmp.path / "o1" / "report.json") == slurp(tmp.path / "o2" / "report.json"));
}

TEST_CASE("cli: forge writes the documented format") {
  TempDir tmp;
  write_dataset(tmp.path / "d.jsonl",
                {{"doc",
                  "Gareth Bale scored twice. Cristiano Ronaldo scored five goals.",
                  "Gareth Bale is a winger."}});
  CHECK(cli::run({"factsum", "forge", "--data", (tmp.path / "d.jsonl").string(), "--out",
                  (tmp.path / "f.jsonl").string(), "--per-pair", "2", "--seed", "5"}) == 0);
  std::ifstream is(tmp.path / "f.jsonl");
  std::string line;
  std::size_t count = 0;
  bool saw_identity = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("article"));
    CHECK(j.contains("clean"));
    CHECK(j.contains("corrupted"));
    CHECK(j.contains("transform"));
    CHECK(j.contains("swap"));
    if (j["transform"] == "paraphrase_stub") saw_identity = true;
    ++count;
  }
  CHECK(count >= 2);
  CHECK(saw_identity);
}

TEST_CASE("cli: train then summarize round-trips through the model directory") {
  TempDir tmp;
  auto pairs = testutil::toy_pairs();
  pairs.resize(4);
  write_dataset(tmp.path / "d.jsonl", pairs);
  write_file(tmp.path / "micro.cfg",
             "layers = 1\nheads = 2\nmodel_dim = 32\nff_dim = 64\nvocab_size = 400\n"
             "epochs = 2\nbatch_size = 2\nmax_article_len = 96\nmax_summary_len = 32\n"
             "gat_heads = 2\ngat_hidden = 8\nbilstm_hidden = 8\nbeam_width = 2\n");
  CHECK(cli::run({"factsum", "--config", (tmp.path / "micro.cfg").string(), "--seed", "3",
                  "train", "--data", (tmp.path / "d.jsonl").string(), "--outdir",
                  (tmp.path / "model").string()}) == 0);
  CHECK(fs::exists(tmp.path / "model" / "checkpoint.bin"));
  CHECK(fs::exists(tmp.path / "model" / "vocab.bpe"));
  CHECK(fs::exists(tmp.path / "model" / "loss_curve.json"));

  CHECK(cli::run({"factsum", "summarize", "--data", (tmp.path / "d.jsonl").string(),
                  "--model", (tmp.path / "model").string(), "--out",
                  (tmp.path / "preds.jsonl").string()}) == 0);
  std::ifstream is(tmp.path / "preds.jsonl");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(is, line))
    if (!line.empty()) {
      const auto j = nlohmann::json::parse(line);
      CHECK(j.contains("id"));
      CHECK(j.contains("summary"));
      ++lines;
    }
  CHECK(lines == 4);
}

TEST_CASE("cli: atomic write leaves no temp files behind") {
  TempDir tmp;
  data::atomic_write(tmp.path / "x.json", "{}\n");
  CHECK(fs::exists(tmp.path / "x.json"));
  CHECK(!fs::exists(tmp.path / "x.json.tmp"));
}

TEST_CASE("parallel_for: ordered results regardless of thread count") {
  std::vector<std::size_t> out(64, 0);
  cli::parallel_for(64, [&](std::size_t i) { out[i] = i * i; });
  for (std::size_t i = 0; i < 64; ++i) CHECK(out[i] == i * i);
}
