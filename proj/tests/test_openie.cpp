#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "factsum/openie.hpp"

using namespace factsum;
using namespace factsum::openie;

static std::vector<RelationTuple> extract_one(const std::string& sentence) {
  return extract_sentence(textkit::tokenize(sentence), 0);
}

TEST_CASE("extract_sentence: simple transitive") {
  auto ts = extract_one("John visited Paris .");
  REQUIRE(ts.size() == 1);
  CHECK(ts[0].subject == "John");
  CHECK(ts[0].relation == "visited");
  CHECK(ts[0].object == "Paris");
  CHECK(ts[0].confidence == 1.0);
}

TEST_CASE("extract_sentence: no subject noun phrase") {
  CHECK(extract_one("Run !").empty());
}

TEST_CASE("extract_sentence: copula complement") {
  auto ts = extract_one("Bale is a winger .");
  REQUIRE(ts.size() == 1);
  CHECK(ts[0].subject == "Bale");
  CHECK(ts[0].relation == "is");
  CHECK(ts[0].object == "a winger");
}

TEST_CASE("extract_sentence: negation stays inside the relation") {
  auto ts = extract_one("Bale did not score a goal .");
  REQUIRE(ts.size() == 1);
  CHECK(ts[0].subject == "Bale");
  CHECK(ts[0].relation == "did not score");
  CHECK(ts[0].object == "a goal");
}

TEST_CASE("extract_sentence: number object and trailing preposition") {
  auto ts = extract_one("Ronaldo scored five goals");
  REQUIRE(ts.size() == 1);
  CHECK(ts[0].object == "five goals");

  ts = extract_one("Bale plays in Madrid");
  REQUIRE(ts.size() == 1);
  CHECK(ts[0].relation == "plays in");
  CHECK(ts[0].object == "Madrid");
}

TEST_CASE("extract_sentence: pronoun subject") {
  auto ts = extract_one("He scored twice");
  REQUIRE(ts.size() == 1);
  CHECK(ts[0].subject == "He");
  CHECK(ts[0].relation == "scored");
  CHECK(ts[0].object == "twice");
}

TEST_CASE("extract_sentence: multiple verb groups yield multiple tuples") {
  auto ts = extract_one("John visited Paris and Mary visited Rome");
  REQUIRE(ts.size() == 2);
  CHECK(ts[0].subject == "John");
  CHECK(ts[1].subject == "Mary");
  CHECK(ts[1].object == "Rome");
}

TEST_CASE("extract_document: empty text") {
  auto set = extract_document("");
  CHECK(set.tuples.empty());
}

TEST_CASE("extract_document: dedup on normalized slots") {
  auto set = extract_document("John visited Paris. John visited Paris.");
  CHECK(set.tuples.size() == 1);

  auto set2 = extract_document("John visited Paris. JOHN  visited PARIS.");
  CHECK(set2.tuples.size() == 1);
}

TEST_CASE("extract_document: sentence indices advance") {
  auto set = extract_document("John visited Paris. Mary bought a house.");
  REQUIRE(set.tuples.size() == 2);
  CHECK(set.tuples[0].sentence_index == 0);
  CHECK(set.tuples[1].sentence_index == 1);
  CHECK(set.tuples[1].subject == "Mary");
  CHECK(set.tuples[1].relation == "bought");
  CHECK(set.tuples[1].object == "a house");
}

TEST_CASE("extract_document: determinism") {
  const std::string text =
      "Gareth Bale scored twice on Sunday. Cristiano Ronaldo scored five goals against "
      "Granada. The team was happy.";
  auto a = extract_document(text);
  auto b = extract_document(text);
  REQUIRE(a.tuples.size() == b.tuples.size());
  for (std::size_t i = 0; i < a.tuples.size(); ++i) {
    CHECK(a.tuples[i].subject == b.tuples[i].subject);
    CHECK(a.tuples[i].relation == b.tuples[i].relation);
    CHECK(a.tuples[i].object == b.tuples[i].object);
  }
}

TEST_CASE("slot provenance: slots are contiguous token subsequences") {
  const std::string text =
      "Real Madrid beat Granada on Sunday. The Welsh wizard was happy and he scored twice.";
  const auto sentences = textkit::split_sentences(text);
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    const auto toks = textkit::tokenize_span(text, sentences[s]);
    std::vector<std::string> words;
    for (const auto& t : toks) words.push_back(t.text);
    auto contiguous = [&](const std::string& slot) {
      std::vector<std::string> parts;
      std::size_t b = 0;
      while (b < slot.size()) {
        auto e = slot.find(' ', b);
        if (e == std::string::npos) e = slot.size();
        parts.push_back(slot.substr(b, e - b));
        b = e + 1;
      }
      for (std::size_t i = 0; i + parts.size() <= words.size(); ++i) {
        bool ok = true;
        for (std::size_t j = 0; j < parts.size(); ++j)
          if (words[i + j] != parts[j]) {
            ok = false;
            break;
          }
        if (ok) return true;
      }
      return false;
    };
    for (const auto& t : extract_sentence(toks, s)) {
      CHECK(contiguous(t.subject));
      CHECK(contiguous(t.relation));
      CHECK(contiguous(t.object));
    }
  }
}

TEST_CASE("idempotent dedup") {
  auto set = extract_document("John visited Paris. Mary bought a house. John visited Paris.");
  std::set<std::string> keys;
  for (const auto& t : set.tuples) keys.insert(normalized_key(t));
  CHECK(keys.size() == set.tuples.size());
}
