#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "factsum/fc.hpp"
#include "testutil.hpp"

using namespace factsum;
using namespace factsum::fc;

TEST_CASE("forge_entity_swap: replaces with a same-type article entity") {
  neuro::Rng rng(1);
  const std::string article =
      "Gareth Bale scored twice. Cristiano Ronaldo scored five goals against Granada.";
  const std::string summary = "Gareth Bale scored twice.";
  auto s = forge_entity_swap(summary, article, rng);
  REQUIRE(s.has_value());
  CHECK(s->transform == Transform::EntitySwap);
  CHECK(s->corrupted_summary != summary);
  REQUIRE(s->swap.has_value());
  CHECK(s->swap->first != s->swap->second);
  // the replacement text must come from the article's same-type inventory
  bool found = false;
  for (const auto& e : textkit::tag_entities(textkit::tokenize(article)))
    if (e.text == s->swap->second) found = true;
  CHECK(found);
}

TEST_CASE("forge_entity_swap: skips without entities or alternatives") {
  neuro::Rng rng(2);
  CHECK(!forge_entity_swap("the team played well.", "An article without names.", rng)
             .has_value());
  // article offers no distinct same-type alternative
  CHECK(!forge_entity_swap("Bale scored.", "Bale scored.", rng).has_value());
}

TEST_CASE("forge_pronoun_swap: closed pair table") {
  neuro::Rng rng(3);
  auto s = forge_pronoun_swap("He scored twice", "", rng);
  REQUIRE(s.has_value());
  CHECK(s->corrupted_summary == "She scored twice");

  CHECK(!forge_pronoun_swap("The team scored", "", rng).has_value());

  // determinism under the same seed
  neuro::Rng r1(7), r2(7);
  auto a = forge_pronoun_swap("He gave her his word", "", r1);
  auto b = forge_pronoun_swap("He gave her his word", "", r2);
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  CHECK(a->corrupted_summary == b->corrupted_summary);
}

TEST_CASE("forge_negation: insertion, removal, and skip") {
  neuro::Rng rng(4);
  auto ins = forge_negation("Bale is a winger", "", rng);
  REQUIRE(ins.has_value());
  CHECK(ins->corrupted_summary == "Bale is not a winger");

  auto rem = forge_negation("Bale is not a winger", "", rng);
  REQUIRE(rem.has_value());
  CHECK(rem->corrupted_summary == "Bale is a winger");

  CHECK(!forge_negation("Bale scored", "", rng).has_value());
}

TEST_CASE("forge_negation: insert then remove returns the original") {
  neuro::Rng rng(5);
  const std::string original = "The team has a plan";
  auto once = forge_negation(original, "", rng);
  REQUIRE(once.has_value());
  auto twice = forge_negation(once->corrupted_summary, "", rng);
  REQUIRE(twice.has_value());
  CHECK(twice->corrupted_summary == original);
}

TEST_CASE("forge transforms touch one contiguous span") {
  neuro::Rng rng(6);
  const std::string article =
      "Lionel Messi visited Paris. Cristiano Ronaldo stayed in Madrid.";
  const std::string summary = "Lionel Messi visited Paris on Monday.";
  auto s = forge_entity_swap(summary, article, rng);
  REQUIRE(s.has_value());
  // compare token streams: all differences must form one contiguous run
  std::vector<std::string> a, b;
  for (const auto& t : textkit::tokenize(summary)) a.push_back(t.text);
  for (const auto& t : textkit::tokenize(s->corrupted_summary)) b.push_back(t.text);
  std::size_t prefix = 0;
  while (prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix]) ++prefix;
  std::size_t suffix = 0;
  while (suffix + prefix < a.size() && suffix + prefix < b.size() &&
         a[a.size() - 1 - suffix] == b[b.size() - 1 - suffix])
    ++suffix;
  // exactly one small changed window remains between the common ends
  CHECK(prefix + suffix < a.size() + 1);
  CHECK(a.size() - prefix - suffix <= 3);
  CHECK(b.size() - prefix - suffix <= 3);
}

TEST_CASE("make_fc_dataset: emission counts and reproducibility") {
  auto pairs = testutil::toy_pairs();
  std::vector<data::DocumentPair> one = {pairs[0]};
  auto ds = make_fc_dataset(one, 2, {Transform::EntitySwap}, 11);
  CHECK(ds.samples.size() == 3);  // 2 corrupted + 1 identity
  CHECK(ds.samples[2].transform == Transform::ParaphraseStub);
  CHECK(ds.samples[2].corrupted_summary == ds.samples[2].clean_summary);

  auto empty = make_fc_dataset({}, 2, {}, 11);
  CHECK(empty.samples.empty());

  auto again = make_fc_dataset(one, 2, {Transform::EntitySwap}, 11);
  REQUIRE(again.samples.size() == ds.samples.size());
  for (std::size_t i = 0; i < ds.samples.size(); ++i)
    CHECK(again.samples[i].corrupted_summary == ds.samples[i].corrupted_summary);
}

TEST_CASE("make_fc_dataset: skips are passed over and counted") {
  std::vector<data::DocumentPair> one = {
      {"x", "An article with nothing to swap.", "the team played"}};
  auto ds = make_fc_dataset(one, 2, {Transform::EntitySwap, Transform::Negation}, 3);
  // no entities and no negation site: only the identity sample remains
  CHECK(ds.samples.size() == 1);
  CHECK(ds.skipped > 0);
}

TEST_CASE("build_correction_input: exactly one SEP, summary first, truncation") {
  auto pairs = testutil::toy_pairs();
  auto vocab = testutil::toy_vocab(pairs);
  const auto ids = build_correction_input(vocab, pairs[0].summary, pairs[0].article, false, 512);
  CHECK(ids.front() == textkit::SubwordVocab::bos_id);
  CHECK(ids.back() == textkit::SubwordVocab::eos_id);
  CHECK(std::count(ids.begin(), ids.end(), textkit::SubwordVocab::sep_id) == 1);

  const auto sep_pos = static_cast<std::size_t>(
      std::find(ids.begin(), ids.end(), textkit::SubwordVocab::sep_id) - ids.begin());
  const auto sum_len = fasum::encode_text(vocab, pairs[0].summary, false).size();
  CHECK(sep_pos == 1 + sum_len);

  const auto clipped = build_correction_input(vocab, pairs[0].summary, pairs[0].article, false,
                                              16);
  CHECK(clipped.size() == 16);
  CHECK(clipped.back() == textkit::SubwordVocab::eos_id);
}

TEST_CASE("token diff counts replacements") {
  const std::vector<std::string> a = {"He", "scored", "five", "goals"};
  const std::vector<std::string> b = {"He", "scored", "two", "goals"};
  auto ops = fc::detail::token_diff(a, b);
  REQUIRE(ops.size() == 1);
  CHECK(ops[0].kind == DiffOp::Kind::Replace);
  CHECK(ops[0].before == "five");
  CHECK(ops[0].after == "two");
}

TEST_CASE("corrector overfit: recovers clean summaries and keeps identities") {
  auto pairs = testutil::toy_pairs();
  auto vocab = testutil::toy_vocab(pairs);

  FasumConfig cfg = testutil::desk_config(vocab.size());
  cfg.layers = 2;
  cfg.heads = 4;
  cfg.model_dim = 96;
  cfg.ff_dim = 192;
  cfg.max_article_len = 160;  // corrector input holds summary + article
  cfg.lr = 1e-3;
  cfg.batch_size = 4;
  cfg.epochs = 220;
  cfg.stop_train_acc = 0.0;
  cfg.stop_train_loss = 0.04;
  cfg.seed = 23;

  // a small forge set: one corruption + one identity per pair
  auto ds = make_fc_dataset(pairs, 1, {}, 29);
  REQUIRE(ds.samples.size() >= 12);

  neuro::ParameterStore<float> store;
  auto report = train_corrector(ds, vocab, cfg, store);
  CHECK(report.epoch_loss.back() < 0.2);

  std::size_t recovered = 0, total = 0, ident_ok = 0, ident_total = 0;
  for (const auto& s : ds.samples) {
    auto res = correct(s.corrupted_summary, s.article, vocab, cfg, store);
    if (s.transform == Transform::ParaphraseStub) {
      ++ident_total;
      if (res.corrected == s.clean_summary) ++ident_ok;
    } else {
      ++total;
      if (res.corrected == s.clean_summary) ++recovered;
    }
  }
  // overfit memorization: nearly everything comes back clean
  CHECK(static_cast<double>(recovered) >= 0.9 * static_cast<double>(total));
  CHECK(static_cast<double>(ident_ok) >= 0.95 * static_cast<double>(ident_total));
}
