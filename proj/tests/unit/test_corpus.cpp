#include <doctest.h>

#include <set>
#include <string>

#include "arm/corpus.hpp"
#include "arm/error.hpp"
#include "support.hpp"

using namespace arm;
using namespace arm::testing;

TEST_CASE("load_corpus reads a single passage line") {
  TempDir dir("corpus");
  write_file(dir / "c.jsonl",
             R"({"id":"p1","kind":"passage","title":"T","sentences":["a."]})"
             "\n");
  const auto corpus = load_corpus(dir / "c.jsonl");
  CHECK(corpus.objects().size() == 1);
  CHECK(corpus.chunks().size() == 1);
  CHECK(corpus.chunks()[0].key() == "p1#0");
}

TEST_CASE("ragged table row is rejected with the object id") {
  TempDir dir("corpus");
  write_file(dir / "c.jsonl",
             R"({"id":"t9","kind":"table","title":"T","columns":["a","b","c"],"rows":[["1","2"]]})"
             "\n");
  try {
    (void)load_corpus(dir / "c.jsonl");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("t9") != std::string::npos);
  }
}

TEST_CASE("malformed line reports its line number") {
  TempDir dir("corpus");
  write_file(dir / "c.jsonl",
             R"({"id":"p1","kind":"passage","title":"T","sentences":["a."]})"
             "\n{not json\n");
  try {
    (void)load_corpus(dir / "c.jsonl");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("duplicate ids and structural violations") {
  CHECK_THROWS_AS(Corpus({passage("x", "A", {"s."}), passage("x", "B", {"t."})}), ValidationError);
  CHECK_THROWS_AS(validate_object(passage("p", "A", {})), ValidationError);
  CHECK_THROWS_AS(validate_object(table("t", "A", {}, {})), ValidationError);
  auto mixed = passage("p", "A", {"s."});
  mixed.columns = {"c"};
  CHECK_THROWS_AS(validate_object(mixed), ValidationError);
}

TEST_CASE("unknown fields are rejected") {
  auto j = object_to_json(passage("p", "A", {"s."}));
  j["extra"] = 1;
  CHECK_THROWS_AS(object_from_json(j), ValidationError);
}

TEST_CASE("save then load is the identity") {
  TempDir dir("corpus");
  const Corpus original({table("t1", "Schools", {"name", "rate"}, {{"A", "0.5"}, {"B", ""}}, "Free meal rates"),
                         passage("p1", "Note", {"First one.", "Second one."})});
  save_corpus(original, dir / "c.jsonl");
  const auto loaded = load_corpus(dir / "c.jsonl");
  CHECK(loaded == original);
  CHECK(loaded.objects()[0].description == std::optional<std::string>("Free meal rates"));
}

TEST_CASE("gold labels round-trip") {
  TempDir dir("corpus");
  const std::vector<GoldQuestion> gold{{"q1", "Which one?", {"a", "b"}}, {"q2", "Where?", {"c"}}};
  save_gold(gold, dir / "g.jsonl");
  CHECK(load_gold(dir / "g.jsonl") == gold);
}

TEST_CASE("serialization format") {
  CHECK(serialize_object(passage("p", "X", {"a.", "b."})) == "X | a. b.");
  CHECK(serialize_object(table("t", "T", {"c1"}, {{"v"}})) == "T | c1 | v");
  CHECK(serialize_object(table("t", "T", {"c1", "c2"}, {{"a", "b"}, {"c", "d"}}, "D")) ==
        "T | D | c1 | c2 | a | b\n| c | d");
  const auto obj = table("t", "T", {"c1"}, {{"v"}}, "");
  CHECK(serialize_object(obj) == serialize_object(obj));
  CHECK(serialize_object(obj) == "T | c1 | v");
}

TEST_CASE("serialization is injective on a fixture corpus") {
  TextGen gen(11);
  std::vector<DataObject> objects;
  for (int i = 0; i < 40; ++i) {
    objects.push_back(i % 2 ? gen.random_table("t" + std::to_string(i))
                            : gen.random_passage("p" + std::to_string(i)));
  }
  std::set<std::string> seen;
  std::set<std::string> distinct;
  for (const auto& o : objects) {
    auto key = object_to_json(o);
    key.erase("id");
    if (distinct.insert(key.dump()).second) seen.insert(serialize_object(o));
  }
  CHECK(seen.size() == distinct.size());
}

TEST_CASE("chunk windows") {
  const auto five = passage("p", "X", {"1.", "2.", "3.", "4.", "5."});
  const auto chunks = chunk_object(five, 2);
  REQUIRE(chunks.size() == 3);
  CHECK(chunks[0].span == Span{0, 2});
  CHECK(chunks[1].span == Span{2, 4});
  CHECK(chunks[2].span == Span{4, 5});
  CHECK(chunks[1].text == "X | 3. 4.");
  CHECK(chunk_object(table("t", "T", {"c"}, {{"v"}}), 10).size() == 1);
  CHECK_THROWS_AS(Corpus({five}, 0), ValidationError);
}

TEST_CASE("chunk spans partition every random object") {
  TextGen gen(3);
  for (int i = 0; i < 200; ++i) {
    const auto obj = i % 2 ? gen.random_table("t", 3, 12) : gen.random_passage("p", 12);
    const std::size_t max_units = gen.uniform(1, 5);
    const auto chunks = chunk_object(obj, max_units);
    REQUIRE(!chunks.empty());
    std::size_t next = 0;
    for (std::size_t c = 0; c < chunks.size(); ++c) {
      CHECK(chunks[c].chunk_index == c);
      CHECK(chunks[c].span.begin == next);
      CHECK(chunks[c].span.size() >= 1);
      CHECK(chunks[c].span.size() <= max_units);
      CHECK(chunks[c].text == serialize_span(obj, chunks[c].span));
      next = chunks[c].span.end;
    }
    CHECK(next == obj.unit_count());
  }
}

TEST_CASE("corpus lookup") {
  const Corpus corpus({passage("b", "B", {"1.", "2.", "3."}), passage("a", "A", {"x."})}, 2);
  CHECK(corpus.chunks().size() == 3);
  CHECK(corpus.chunks_of("b").size() == 2);
  CHECK(corpus.index_of("a") == 1);
  CHECK(corpus.find("zz") == nullptr);
  CHECK_THROWS_AS(corpus.object("zz"), ValidationError);
}
