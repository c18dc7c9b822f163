#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "arm/baselines.hpp"
#include "arm/error.hpp"
#include "arm/eval.hpp"
#include "arm/metrics.hpp"
#include "arm/pipeline.hpp"
#include "arm/planted.hpp"
#include "support.hpp"

using namespace arm;
using namespace arm::testing;

namespace {

class FixedProvider final : public EmbeddingProvider {
 public:
  explicit FixedProvider(std::map<std::string, Vector> m) : m_(std::move(m)) {}
  std::string name() const override { return "fixed"; }
  std::size_t dimension() const override { return 2; }
  Vector embed(std::string_view text) const override {
    auto it = m_.find(std::string(text));
    return it == m_.end() ? Vector{0, 1} : it->second;
  }

 private:
  std::map<std::string, Vector> m_;
};

Vector at_cosine(double c) { return {c, std::sqrt(1 - c * c)}; }

std::vector<std::string> ids_of(const std::vector<ScoredObject>& v) {
  std::vector<std::string> out;
  for (const auto& s : v) out.push_back(s.id);
  return out;
}

/// Reranks by the dense score itself.
class DenseReranker final : public Reranker {
 public:
  DenseReranker(const VectorStore& store, Vector q) : store_(store), q_(std::move(q)) {}
  double score(std::string_view, const DataObject& o) const override {
    return object_similarity(store_, q_, o);
  }

 private:
  const VectorStore& store_;
  Vector q_;
};

Corpus animals() {
  return Corpus({passage("za", "zebra", {"zebra zebra."}), passage("li", "lion", {"lion lion."}),
                 passage("ho", "horse", {"horse horse."}), passage("ca", "cat", {"cat cat."})});
}

std::vector<std::string> search_all(const Corpus& corpus, std::size_t k) {
  std::vector<std::string> out;
  for (const auto& o : corpus.objects()) {
    if (out.size() == k) break;
    out.push_back(o.id);
  }
  return out;
}

}  // namespace

TEST_CASE("dense retrieval orders by best chunk") {
  const Corpus corpus({passage("a", "A", {"a1.", "a2."}), passage("b", "B", {"b1."}), passage("c", "C", {"c1."})}, 1);
  std::map<std::string, Vector> v{{"q", {1, 0}}};
  v[corpus.chunks()[0].text] = at_cosine(0.3);
  v[corpus.chunks()[1].text] = at_cosine(0.85);
  v[corpus.chunks()[2].text] = at_cosine(0.6);
  v[corpus.chunks()[3].text] = at_cosine(0.6);
  const FixedProvider provider(v);
  const auto store = embed_corpus(provider, corpus);
  const auto q = provider.embed("q");
  const auto hits = dense_retrieve(q, store, corpus, 3);
  CHECK(ids_of(hits) == std::vector<std::string>{"a", "b", "c"});
  CHECK(hits[0].score == doctest::Approx(0.85));
  CHECK(dense_retrieve(q, store, corpus, 1).size() == 1);
  CHECK(dense_retrieve(q, store, corpus, 10).size() == 3);

  const Corpus lone({passage("x", "X", {"y."})});
  CHECK(ids_of(dense_retrieve(q, embed_corpus(provider, lone), lone, 3)) == std::vector<std::string>{"x"});
  CHECK_THROWS(dense_retrieve(q, store, corpus, 0));
}

TEST_CASE("reranking") {
  const auto corpus = animals();
  const HashEmbeddingProvider hash(64, 0);
  const auto store = embed_corpus(hash, corpus);
  const auto q = hash.embed("zebra lion");
  const DenseReranker same(store, q);
  CHECK(ids_of(rerank_retrieve("zebra lion", q, store, corpus, same, 4, 3)) ==
        ids_of(dense_retrieve(q, store, corpus, 3)));
  const auto pool = ids_of(dense_retrieve(q, store, corpus, 2));
  for (const auto& id : ids_of(rerank_retrieve("zebra lion", q, store, corpus, OverlapReranker{}, 2, 2))) {
    CHECK(std::find(pool.begin(), pool.end(), id) != pool.end());
  }
  CHECK_THROWS(rerank_retrieve("x", q, store, corpus, same, 1, 2));
}

TEST_CASE("overlap reranker promotes an exact match") {
  std::vector<DataObject> objs;
  std::map<std::string, Vector> v{{"q", {1, 0}}};
  const double sims[] = {0.9, 0.85, 0.8, 0.75, 0.7, 0.65, 0.6};
  for (int i = 0; i < 7; ++i) {
    const bool exact = i == 5;
    objs.push_back(passage("o" + std::to_string(i), exact ? "Golden Gate" : "Other " + std::to_string(i),
                           {exact ? "golden gate bridge." : "nothing here."}));
  }
  const Corpus corpus(objs);
  for (int i = 0; i < 7; ++i) v[corpus.chunks()[i].text] = at_cosine(sims[i]);
  const FixedProvider provider(v);
  const auto store = embed_corpus(provider, corpus);
  const auto q = provider.embed("q");
  CHECK(ids_of(dense_retrieve(q, store, corpus, 7))[5] == "o5");
  const auto top = rerank_retrieve("golden gate bridge", q, store, corpus, OverlapReranker{}, 7, 5);
  CHECK(top[0].id == "o5");
  CHECK(top[0].score == 1.0);
}

TEST_CASE("query decomposition") {
  const auto corpus = animals();
  TextEmbeddings emb(std::make_shared<HashEmbeddingProvider>(64, 0));
  const auto store = embed_corpus(emb.provider(), corpus);

  MockScorer silent;
  silent.script({"split"}, {"<eos>"});
  const auto same = decomposed_retrieve(silent, "split", "zebra lion", emb, store, corpus, nullptr, 3);
  CHECK(same.sub_questions == std::vector<std::string>{"zebra lion"});
  CHECK(same.llm_calls == 1);
  CHECK(ids_of(same.objects) == ids_of(dense_retrieve(emb.get("zebra lion"), store, corpus, 3)));

  MockScorer splitter;
  splitter.script_sequence({"split"}, {"zebra", "<nl>", "lion", "<eos>"});
  DecompositionOptions opt;
  opt.per_sub = 1;
  const auto two = decomposed_retrieve(splitter, "split", "zebra lion", emb, store, corpus, nullptr, 2, opt);
  CHECK(two.sub_questions == std::vector<std::string>{"zebra", "lion"});
  auto got = ids_of(two.objects);
  std::sort(got.begin(), got.end());
  CHECK(got == std::vector<std::string>{"li", "za"});
  CHECK(dense_retrieve(emb.get("zebra lion"), store, corpus, 1).size() == 1);

  const OverlapReranker overlap;
  const auto reranked =
      decomposed_retrieve(splitter, "split", "zebra lion", emb, store, corpus, &overlap, 1, opt);
  CHECK(reranked.objects.size() <= 1);
}

TEST_CASE("agent loop accounting") {
  const auto corpus = animals();
  SearchFn search = [&](const std::string&, std::size_t k) { return search_all(corpus, k); };
  AgentOptions opt;
  opt.per_search = 5;

  MockScorer finish;
  finish.script_sequence({"go"}, {"Finish[none]", "<nl>"});
  const auto a = agentic_retrieve(finish, "go", search, corpus, opt);
  CHECK(a.transcript.iterations() == 1);
  CHECK(a.llm_calls == 0);
  CHECK(a.retrieved.empty());
  CHECK(a.transcript.stop == AgentStop::Finish);

  const Corpus big({passage("p1", "a", {"x."}), passage("p2", "b", {"x."}), passage("p3", "c", {"x."}),
                    passage("p4", "d", {"x."}), passage("p5", "e", {"x."}), passage("p6", "f", {"x."})});
  SearchFn big_search = [&](const std::string&, std::size_t k) { return search_all(big, k); };
  MockScorer once;
  once.script_sequence({"go"}, {"Search[zebra]", "<nl>"});
  once.script_sequence({"<nl>"}, {"Finish[done]", "<nl>"});
  const auto b = agentic_retrieve(once, "go", big_search, big, opt);
  CHECK(b.transcript.iterations() == 2);
  CHECK(b.llm_calls == 1);
  CHECK(b.retrieved.size() == 5);
  CHECK(b.objects_shown == 5);

  MockScorer loop;
  loop.script_sequence({"go"}, {"Search[zebra]", "<nl>"});
  loop.script_sequence({"<nl>"}, {"Search[zebra]", "<nl>"});
  const auto c = agentic_retrieve(loop, "go", big_search, big, opt);
  CHECK(c.transcript.iterations() == 8);
  CHECK(c.llm_calls == 7);
  CHECK(c.transcript.stop == AgentStop::IterationCap);
  CHECK(c.objects_shown == 35);
  CHECK(c.retrieved.size() == 5);

  MockScorer babble;
  babble.script_sequence({"go"}, {"hmm", "<nl>"});
  const auto d = agentic_retrieve(babble, "go", big_search, big, opt);
  CHECK(d.transcript.iterations() == 1);
  CHECK(d.transcript.stop == AgentStop::Malformed);
  CHECK(d.llm_calls == 0);
}

TEST_CASE("action parsing") {
  CHECK(parse_action("I will Search[ zebra stripes ] now").action == AgentAction::Search);
  CHECK(parse_action("search[zebra]").argument == "zebra");
  CHECK(parse_action("finish[x] search[y]").action == AgentAction::Finish);
  CHECK(parse_action("Search[]").action == AgentAction::Malformed);
  CHECK(parse_action("Search[open").action == AgentAction::Malformed);
  CHECK(parse_action("nothing").action == AgentAction::Malformed);
}

TEST_CASE("metric fixtures") {
  struct Row {
    std::vector<std::string> retrieved, gold;
    double p, r, f1;
    bool pr;
  };
  const std::vector<Row> rows{
      {{"A", "B", "C"}, {"A", "B"}, 2.0 / 3, 1.0, 0.8, true},
      {{"C"}, {"A"}, 0.0, 0.0, 0.0, false},
      {{"A", "B"}, {"A", "B"}, 1.0, 1.0, 1.0, true},
      {{}, {"A"}, 0.0, 0.0, 0.0, false},
      {{"A"}, {"A", "B"}, 1.0, 0.5, 2.0 / 3, false},
      {{"A", "C", "D", "E"}, {"A", "B"}, 0.25, 0.5, 1.0 / 3, false},
      {{"A", "A", "B"}, {"A", "B", "C"}, 1.0, 2.0 / 3, 0.8, false},
      {{"B", "C", "D", "E", "F"}, {"B", "C", "D"}, 0.6, 1.0, 0.75, true},
      {{"X", "Y", "Z", "A", "B"}, {"A", "B", "C", "D"}, 0.4, 0.5, 4.0 / 9, false},
      {{"A", "B", "C", "D", "E"}, {"E"}, 0.2, 1.0, 1.0 / 3, true},
  };
  for (const auto& row : rows) {
    const auto m = compute_metrics(row.retrieved, row.gold);
    CHECK(std::abs(m.precision - row.p) < 1e-12);
    CHECK(std::abs(m.recall - row.r) < 1e-12);
    CHECK(std::abs(m.f1 - row.f1) < 1e-12);
    CHECK(m.perfect_recall == row.pr);
  }
  CHECK_THROWS_AS(compute_metrics({"A"}, {}), EmptyGold);
}

TEST_CASE("metric properties") {
  TextGen gen(151, 8);
  for (int run = 0; run < 300; ++run) {
    std::vector<std::string> retrieved, gold;
    for (std::size_t i = 0, n = gen.uniform(0, 6); i < n; ++i) retrieved.push_back(gen.word());
    for (std::size_t i = 0, n = gen.uniform(1, 4); i < n; ++i) gold.push_back(gen.word());
    const auto m = compute_metrics(retrieved, gold);
    for (double x : {m.precision, m.recall, m.f1}) {
      CHECK(x >= 0.0);
      CHECK(x <= 1.0);
    }
    const double lo = std::min(m.precision, m.recall);
    CHECK(m.f1 <= 2 * lo / (1 + lo) + 1e-12);
    CHECK(m.perfect_recall == (m.recall == 1.0));
  }
}

TEST_CASE("run_eval over a small engine") {
  Config config;
  config.top_k = 1;
  auto provider = std::make_shared<HashEmbeddingProvider>(64, 0);
  auto corpus = animals();
  Engine engine(config, corpus, build_index(corpus), provider);
  const std::vector<GoldQuestion> qs{{"q1", "zebra", {"za"}}, {"q2", "zebra", {"li"}}};
  const auto report = run_eval(engine, qs, Method::Dense);
  REQUIRE(report.rows.size() == 2);
  CHECK(report.rows[0].retrieved == std::vector<std::string>{"za"});
  CHECK(report.perfect_recall == 50.0);
  CHECK(report.avg_llm_calls == 0.0);

  CHECK_THROWS_AS(run_eval(engine, {{"q3", "zebra", {"nope"}}}, Method::Dense), UnknownGoldId);
  CHECK_THROWS_AS(check_gold(corpus, {{"q4", "zebra", {"za", "gone"}}}), UnknownGoldId);
}

TEST_CASE("arm makes one call per question and reruns identically") {
  PlantedOptions po;
  po.questions = 4;
  const auto bench = generate_planted(po);
  CHECK(check_planted(bench).empty());
  Config config;
  config.seed = 7;
  Corpus corpus(bench.objects);
  Engine engine(config, corpus, build_index(corpus), std::make_shared<HashEmbeddingProvider>(64, 7));
  const auto first = run_eval(engine, bench.gold(), Method::Arm);
  for (const auto& row : first.rows) CHECK(row.llm_calls == 1);
  CHECK(first.avg_llm_calls == 1.0);

  const auto again = run_eval(engine, bench.gold(), Method::Arm, 3);
  CHECK(report_json({first}).dump() == report_json({again}).dump());
  CHECK(report_csv({first}) == report_csv({again}));

  const auto react = run_eval(engine, bench.gold(), Method::React);
  for (const auto& row : react.rows) {
    const auto iterations = row.trace.contains("iterations") ? row.trace["iterations"].get<std::size_t>()
                                                             : row.llm_calls + 1;
    CHECK(row.llm_calls + 1 == iterations);
  }
}

TEST_CASE("method names round-trip") {
  for (auto m : {Method::Dense, Method::Rerank, Method::DenseDecomp, Method::RerankDecomp, Method::React,
                 Method::Arm, Method::ArmIA, Method::ArmSA}) {
    CHECK(parse_method(method_name(m)) == m);
  }
  CHECK_THROWS_AS(parse_method("magic"), ConfigError);
}
