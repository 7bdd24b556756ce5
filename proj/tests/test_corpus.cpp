#include <doctest.h>

#include <string>

#include "deideval/corpus.hpp"
#include "deideval/errors.hpp"
#include "deideval/text.hpp"
#include "test_support.hpp"

using namespace deideval;

namespace {

const char* kGoodCorpus =
    R"({"kind": "note", "id": "n-02", "text": "Seen by Dr. Wong on 03/15/2024."})"
    "\n"
    R"({"kind": "note", "id": "n-01", "text": "Patient John Smith, 45 years old."})"
    "\r\n"
    "\n"
    R"({"kind": "gold", "note_id": "n-01", "category": "PERSON", "surface": "John Smith"})"
    "\n"
    R"({"kind": "gold", "note_id": "n-02", "category": "DATE_TIME", "surface": "03/15/2024"})"
    "\n"
    R"({"kind": "gold", "note_id": "n-01", "category": "EXT:mrn", "surface": "884-22"})"
    "\n";

}  // namespace

TEST_CASE("load_corpus reads notes and gold, sorts by id") {
  testsup::TempDir dir("corpus");
  testsup::write_file(dir / "c.jsonl", kGoodCorpus);
  const Corpus corpus = load_corpus(dir / "c.jsonl");

  REQUIRE(corpus.notes().size() == 2);
  CHECK(corpus.notes()[0].id() == "n-01");  // sorted despite file order
  CHECK(corpus.notes()[1].id() == "n-02");
  CHECK(corpus.notes()[0].body() == "Patient John Smith, 45 years old.");
  CHECK(corpus.notes()[0].token_count() == text::count_tokens(corpus.notes()[0].body()));

  REQUIRE(corpus.has_gold());
  CHECK(corpus.gold().size() == 3);
  CHECK(corpus.gold_for("n-01").size() == 2);
  CHECK(corpus.gold_for("n-02").size() == 1);
  CHECK(corpus.gold_for("n-99").empty());

  CHECK(corpus.find_note("n-02") != nullptr);
  CHECK(corpus.find_note("n-03") == nullptr);
  CHECK(corpus.total_tokens() ==
        corpus.notes()[0].token_count() + corpus.notes()[1].token_count());
}

TEST_CASE("gold extension categories join the corpus category list") {
  testsup::TempDir dir("corpus");
  testsup::write_file(dir / "c.jsonl", kGoodCorpus);
  const Corpus corpus = load_corpus(dir / "c.jsonl");

  bool found = false;
  for (const auto& c : corpus.categories()) {
    if (c.tag_string() == "EXT:mrn") found = true;
  }
  CHECK(found);
  // The closed set always comes first.
  CHECK(corpus.categories().size() == PhiCategory::closed_set().size() + 1);
}

TEST_CASE("corpus without gold lines has no gold") {
  testsup::TempDir dir("corpus");
  testsup::write_file(dir / "c.jsonl",
                      R"({"kind": "note", "id": "a", "text": "hello there"})"
                      "\n");
  const Corpus corpus = load_corpus(dir / "c.jsonl");
  CHECK_FALSE(corpus.has_gold());
  CHECK_THROWS_AS((void)corpus.gold(), Error);
}

TEST_CASE("load_corpus error paths carry line numbers") {
  testsup::TempDir dir("corpus");

  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_corpus(dir / "absent.jsonl"), MissingFileError);
  }
  SUBCASE("malformed json") {
    testsup::write_file(dir / "c.jsonl", "{\"kind\": \"note\"\nnot json\n");
    CHECK_THROWS_WITH_AS(load_corpus(dir / "c.jsonl"),
                         doctest::Contains("line 1"), MalformedRecordError);
  }
  SUBCASE("unknown kind") {
    testsup::write_file(dir / "c.jsonl", R"({"kind": "banana"})"
                                         "\n");
    CHECK_THROWS_AS(load_corpus(dir / "c.jsonl"), MalformedRecordError);
  }
  SUBCASE("missing field") {
    testsup::write_file(dir / "c.jsonl", R"({"kind": "note", "id": "x"})"
                                         "\n");
    CHECK_THROWS_AS(load_corpus(dir / "c.jsonl"), MalformedRecordError);
  }
  SUBCASE("bad gold category") {
    testsup::write_file(dir / "c.jsonl",
                        R"({"kind": "note", "id": "x", "text": "t"})"
                        "\n"
                        R"({"kind": "gold", "note_id": "x", "category": "", "surface": "s"})"
                        "\n");
    CHECK_THROWS_WITH_AS(load_corpus(dir / "c.jsonl"),
                         doctest::Contains("line 2"), MalformedRecordError);
  }
  SUBCASE("duplicate note id") {
    testsup::write_file(dir / "c.jsonl",
                        R"({"kind": "note", "id": "x", "text": "a"})"
                        "\n"
                        R"({"kind": "note", "id": "x", "text": "b"})"
                        "\n");
    CHECK_THROWS_AS(load_corpus(dir / "c.jsonl"), DuplicateNoteIdError);
  }
  SUBCASE("gold referencing unknown note") {
    testsup::write_file(dir / "c.jsonl",
                        R"({"kind": "note", "id": "x", "text": "a"})"
                        "\n"
                        R"({"kind": "gold", "note_id": "y", "category": "PERSON", "surface": "s"})"
                        "\n");
    CHECK_THROWS_AS(load_corpus(dir / "c.jsonl"), DanglingGoldReferenceError);
  }
}

TEST_CASE("tokenize is the shared whitespace token counter") {
  CHECK(tokenize("Patient John Smith, 45 years old.") == 6);
  CHECK(tokenize("") == 0);
  CHECK(tokenize("a\xC2\xA0g") == 2);
}

TEST_CASE("bundled demo corpus loads with gold for every note") {
  const Corpus corpus = load_corpus(testsup::fixtures_root() / "demo" / "corpus.jsonl");
  CHECK(corpus.notes().size() == 5);
  REQUIRE(corpus.has_gold());
  for (const auto& note : corpus.notes()) {
    CHECK(corpus.gold_for(note.id()).size() > 0);
  }
}
