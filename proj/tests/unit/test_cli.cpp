#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "arm/config.hpp"
#include "arm/error.hpp"
#include "arm/pipeline.hpp"
#include "arm/planted.hpp"
#include "arm/prompts.hpp"
#include "arm/trace.hpp"
#include "support.hpp"

using namespace arm;
using namespace arm::testing;
using nlohmann::json;

namespace {

struct RunResult {
  int status = -1;
  std::string out;
  std::string err;
};

// Runs the CLI with `args` (already shell-quoted) and captures both streams.
RunResult run_cli(const std::string& args, const TempDir& dir) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = std::string("'") + ARM_CLI_PATH + "' " + args + " >'" + out.string() +
                          "' 2>'" + err.string() + "'";
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

// A small planted benchmark on disk.
void write_bench(const TempDir& dir, std::size_t questions = 4) {
  PlantedOptions po;
  po.questions = questions;
  save_planted(generate_planted(po), dir.path());
}

}  // namespace

TEST_CASE("config keys are strict") {
  const auto c = config_from_json(json::parse(R"({"alpha": 0.3, "expansions": [[1, 1]], "mock": {"noise": 0.5}})"));
  CHECK(c.alpha == 0.3);
  CHECK(c.expansions.size() == 1);
  CHECK(c.mock.noise == 0.5);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"alpah": 0.3})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"alpha": 1.5})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"mip_k": 0})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"mock": {"temperature": 1}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"provider": "cloud"})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"alpha": "high"})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse("[]")), ConfigError);

  const auto back = config_from_json(config_to_json(Config{}));
  CHECK(config_to_json(back) == config_to_json(Config{}));

  TempDir dir("cfg");
  write_file(dir / "c.json", R"({"corpus": "data/c.jsonl"})");
  CHECK(load_config(dir / "c.json").corpus == dir / "data/c.jsonl");
  CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
}

TEST_CASE("prompt templates") {
  CHECK(render_template("Q: {user_question} {{x}}", {{"user_question", "why"}}) == "Q: why {x}");
  CHECK_THROWS_AS(render_template("{nope}", {}), TemplateError);
  CHECK_THROWS_AS(render_template("{open", {{"open", ""}}), TemplateError);
  CHECK_THROWS_AS(render_template("close}", {}), TemplateError);
  const auto [before, after] = render_around("a {user_question} b {draft} c", {{"user_question", "q"}}, "draft");
  CHECK(before == "a q b ");
  CHECK(after == " c");

  const auto defaults = default_prompts();
  for (const auto* t : {&defaults.keywords, &defaults.verify, &defaults.decompose, &defaults.react}) {
    CHECK(t->find("{user_question}") != std::string::npos);
  }
  CHECK(defaults.verify.find("{draft}") != std::string::npos);

  TempDir dir("prompts");
  write_file(dir / "k.txt", "Find: {user_question}");
  const auto loaded = load_prompts({{"keywords", dir / "k.txt"}});
  CHECK(loaded.keywords == "Find: {user_question}");
  CHECK(loaded.verify == defaults.verify);
  CHECK_THROWS_AS(load_prompts({{"summary", dir / "k.txt"}}), ConfigError);
  CHECK_THROWS_AS(load_prompts({{"react", dir / "none.txt"}}), ConfigError);
}

TEST_CASE("trace records validate and catch tampering") {
  PlantedOptions po;
  po.questions = 2;
  const auto bench = generate_planted(po);
  Corpus corpus(bench.objects);
  Engine engine(Config{}, corpus, build_index(corpus), std::make_shared<HashEmbeddingProvider>(64, 0));
  const auto& gq = bench.questions[0].gold;
  for (auto m : {Method::Arm, Method::Dense, Method::React, Method::DenseDecomp}) {
    const auto record = trace_record(gq.question_id, gq.question, engine.retrieve(gq.question, m));
    CHECK(validate_trace_record(record).empty());
  }
  auto record = trace_record(gq.question_id, gq.question, engine.retrieve(gq.question, Method::Arm));
  auto bad = record;
  bad["llm_calls"] = 2;
  CHECK_FALSE(validate_trace_record(bad).empty());
  bad = record;
  bad.erase("version");
  CHECK_FALSE(validate_trace_record(bad).empty());

  TempDir dir("trace");
  append_trace(dir / "t.jsonl", record);
  append_trace(dir / "t.jsonl", record);
  CHECK(validate_trace_file(dir / "t.jsonl").empty());
  write_file(dir / "bad.jsonl", record.dump() + "\n{oops\n");
  const auto problems = validate_trace_file(dir / "bad.jsonl");
  REQUIRE(!problems.empty());
  CHECK(problems[0].find("2") != std::string::npos);
}

TEST_CASE("cli index build") {
  TempDir dir("cli");
  write_bench(dir);
  const auto built = run_cli("index build --corpus " + q(dir / "corpus.jsonl") + " --out " + q(dir / "a.idx"), dir);
  REQUIRE(built.status == 0);
  const auto corpus = load_corpus(dir / "corpus.jsonl");
  CHECK(built.out.find("objects " + std::to_string(corpus.objects().size())) != std::string::npos);
  CHECK(built.out.find("chunks " + std::to_string(corpus.chunks().size())) != std::string::npos);
  CHECK(built.out.find("ngrams ") != std::string::npos);

  REQUIRE(run_cli("index build --corpus " + q(dir / "corpus.jsonl") + " --out " + q(dir / "b.idx"), dir).status == 0);
  CHECK(read_file(dir / "a.idx") == read_file(dir / "b.idx"));

  const auto missing = run_cli("index build --corpus " + q(dir / "absent.jsonl") + " --out " + q(dir / "c.idx"), dir);
  CHECK(missing.status == 1);
  CHECK(missing.err.find("absent.jsonl") != std::string::npos);
}

TEST_CASE("cli retrieve") {
  TempDir dir("cli");
  write_bench(dir);
  REQUIRE(run_cli("index build --corpus " + q(dir / "corpus.jsonl") + " --out " + q(dir / "i.idx"), dir).status == 0);
  const auto gold = load_gold(dir / "questions.jsonl");
  const std::string base = "retrieve --corpus " + q(dir / "corpus.jsonl") + " --index " + q(dir / "i.idx") +
                           " --question '" + gold[0].question + "'";
  const auto first = run_cli(base + " --trace " + q(dir / "t.jsonl"), dir);
  REQUIRE(first.status == 0);
  CHECK(first.out.find("llm_calls 1") != std::string::npos);
  const auto second = run_cli(base, dir);
  CHECK(second.out == first.out);
  CHECK(validate_trace_file(dir / "t.jsonl").empty());
  const auto check = run_cli("trace validate " + q(dir / "t.jsonl"), dir);
  CHECK(check.status == 0);
  CHECK(check.out == "ok\n");

  const auto dense = run_cli(base + " --method dense", dir);
  REQUIRE(dense.status == 0);
  CHECK(dense.out.find("llm_calls 0") != std::string::npos);
  CHECK(dense.out != first.out);

  const auto no_index = run_cli("retrieve --corpus " + q(dir / "corpus.jsonl") + " --index " + q(dir / "none.idx") +
                                    " --question x",
                                dir);
  CHECK(no_index.status == 1);
  CHECK(run_cli(base + " --method magic", dir).status == 1);
}

TEST_CASE("cli eval") {
  TempDir dir("cli");
  write_bench(dir);
  const std::string base =
      "eval run --corpus " + q(dir / "corpus.jsonl") + " --questions " + q(dir / "questions.jsonl");
  const auto a = run_cli(base + " --method dense,arm --seed 7 --report " + q(dir / "r1"), dir);
  REQUIRE(a.status == 0);
  std::istringstream lines(a.out);
  std::vector<std::string> rows;
  for (std::string line; std::getline(lines, line);) rows.push_back(line);
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].rfind("dense", 0) == 0);
  CHECK(rows[2].rfind("arm", 0) == 0);
  CHECK(rows[2].find(" 1.00 ") != std::string::npos);
  const auto report = json::parse(read_file(dir / "r1.json"));
  CHECK(report.size() == 2);

  const auto b = run_cli(base + " --method dense,arm --seed 7 --report " + q(dir / "r2"), dir);
  CHECK(b.out == a.out);
  CHECK(read_file(dir / "r1.json") == read_file(dir / "r2.json"));
  CHECK(read_file(dir / "r1.csv") == read_file(dir / "r2.csv"));

  write_file(dir / "bad.jsonl", R"({"question_id":"x","question":"y","gold_object_ids":["nope"]})" "\n");
  const auto bad = run_cli("eval run --corpus " + q(dir / "corpus.jsonl") + " --questions " + q(dir / "bad.jsonl"), dir);
  CHECK(bad.status == 1);
  CHECK(bad.err.find("nope") != std::string::npos);
}

TEST_CASE("cli reads the config from the environment") {
  TempDir dir("cli");
  write_bench(dir, 2);
  write_file(dir / "cfg.json", R"({"corpus": "corpus.jsonl", "top_k": 2})");
  const auto gold = load_gold(dir / "questions.jsonl");
  const auto r = run_cli("retrieve --method dense --question '" + gold[0].question + "'", dir);
  CHECK(r.status == 1);
  const std::string env = "ARM_CONFIG=" + (dir / "cfg.json").string();
  const auto cmd = env + " '" + ARM_CLI_PATH + "' retrieve --method dense --question '" + gold[0].question + "' >" +
                   q(dir / "o.txt");
  REQUIRE(std::system(cmd.c_str()) == 0);
  const auto out = read_file(dir / "o.txt");
  CHECK(out.find("1\t") != std::string::npos);
  CHECK(out.find("3\t") == std::string::npos);
}
