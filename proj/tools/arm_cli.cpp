#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "arm/config.hpp"
#include "arm/error.hpp"
#include "arm/eval.hpp"
#include "arm/ngram_index.hpp"
#include "arm/pipeline.hpp"
#include "arm/planted.hpp"
#include "arm/text.hpp"
#include "arm/trace.hpp"

namespace {

struct Overrides {
  std::string config;
  std::string corpus;
  std::string index;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> top_k;
  std::optional<std::size_t> jobs;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON config file (falls back to $ARM_CONFIG)");
  cmd->add_option("--corpus", o.corpus, "Corpus JSONL");
  cmd->add_option("--index", o.index, "Index snapshot");
  cmd->add_option("--seed", o.seed, "Seed for the mock scorer and hashed embeddings");
}

arm::Config resolve_config(const Overrides& o) {
  std::string path = o.config;
  if (path.empty()) {
    if (const char* env = std::getenv("ARM_CONFIG"); env && *env) path = env;
  }
  arm::Config c = path.empty() ? arm::Config{} : arm::load_config(path);
  if (!o.corpus.empty()) c.corpus = o.corpus;
  if (!o.index.empty()) c.index = o.index;
  if (o.seed) c.seed = *o.seed;
  if (o.top_k) c.top_k = c.final_k = *o.top_k;
  if (o.jobs) c.jobs = *o.jobs;
  c.validate();
  return c;
}

std::vector<arm::Method> parse_methods(const std::vector<std::string>& specs) {
  std::vector<arm::Method> out;
  for (const auto& spec : specs) {
    std::stringstream ss(spec);
    std::string name;
    while (std::getline(ss, name, ',')) {
      if (!name.empty()) out.push_back(arm::parse_method(name));
    }
  }
  if (out.empty()) out.push_back(arm::Method::Arm);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Retrieval over tables and passages"};
  app.require_subcommand(1);

  auto* index_cmd = app.add_subcommand("index", "Index management");
  index_cmd->require_subcommand(1);
  auto* build = index_cmd->add_subcommand("build", "Build an index snapshot");
  std::string build_corpus, build_out;
  std::size_t chunk_units = arm::kDefaultChunkUnits;
  build->add_option("--corpus", build_corpus, "Corpus JSONL")->required();
  build->add_option("--out", build_out, "Snapshot path")->required();
  build->add_option("--chunk-units", chunk_units, "Rows or sentences per chunk")
      ->check(CLI::PositiveNumber);

  Overrides ro;
  auto* retrieve = app.add_subcommand("retrieve", "Answer one question");
  std::string question, method = "arm", trace_path;
  retrieve->add_option("--question", question, "Question text")->required();
  retrieve->add_option("--method", method, "dense|rerank|dense-decomp|rerank-decomp|react|arm|arm-ia|arm-sa");
  retrieve->add_option("--top-k", ro.top_k, "Objects to return")->check(CLI::PositiveNumber);
  retrieve->add_option("--trace", trace_path, "Append the retrieval trace to this JSONL file");
  add_common(retrieve, ro);

  Overrides eo;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluation");
  eval_cmd->require_subcommand(1);
  auto* run = eval_cmd->add_subcommand("run", "Evaluate methods on a gold file");
  std::string questions_path, report_prefix, eval_trace;
  std::vector<std::string> methods;
  run->add_option("--questions", questions_path, "Gold JSONL")->required();
  run->add_option("--method", methods, "Method name; repeat or separate with commas");
  run->add_option("--report", report_prefix, "Write <prefix>.json and <prefix>.csv");
  run->add_option("--trace", eval_trace, "Append per-question traces to this JSONL file");
  run->add_option("--top-k", eo.top_k, "Objects per question")->check(CLI::PositiveNumber);
  run->add_option("--jobs", eo.jobs, "Questions evaluated in parallel")->check(CLI::PositiveNumber);
  add_common(run, eo);

  auto* bench = app.add_subcommand("bench", "Synthetic benchmarks");
  bench->require_subcommand(1);
  auto* gen = bench->add_subcommand("generate", "Write the planted-bridge benchmark");
  std::string bench_out;
  arm::PlantedOptions planted;
  gen->add_option("--out", bench_out, "Output directory")->required();
  gen->add_option("--seed", planted.seed, "Generator seed");
  gen->add_option("--questions", planted.questions, "Question count")->check(CLI::PositiveNumber);
  gen->add_option("--passage-every", planted.passage_every, "Give every n-th question a linked passage")
      ->check(CLI::PositiveNumber);
  gen->add_option("--rows", planted.rows, "Rows per table")->check(CLI::PositiveNumber);
  gen->add_option("--shared-codes", planted.shared_codes, "Join values the bridge copies");

  auto* trace_cmd = app.add_subcommand("trace", "Trace files");
  trace_cmd->require_subcommand(1);
  auto* validate = trace_cmd->add_subcommand("validate", "Check a trace file against the schema");
  std::string validate_path;
  validate->add_option("file", validate_path, "Trace JSONL")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (build->parsed()) {
      auto corpus = arm::load_corpus(build_corpus, chunk_units);
      auto index = arm::build_index(corpus);
      arm::save_index(index, build_out);
      std::cout << "objects " << corpus.objects().size() << "\nchunks " << corpus.chunks().size()
                << "\nngrams " << index.ngram_count() << "\n";
    } else if (retrieve->parsed()) {
      auto config = resolve_config(ro);
      auto engine = arm::Engine::open(config);
      const auto m = arm::parse_method(method);
      auto result = engine->retrieve(question, m);
      for (std::size_t i = 0; i < result.ids.size(); ++i) {
        std::cout << i + 1 << "\t" << result.ids[i] << "\t" << arm::format_fixed(result.scores[i], 4)
                  << "\n";
      }
      std::cout << "llm_calls " << result.llm_calls << "\n";
      if (!trace_path.empty()) arm::append_trace(trace_path, arm::trace_record("q", question, result));
    } else if (run->parsed()) {
      auto config = resolve_config(eo);
      auto engine = arm::Engine::open(config);
      const auto gold = arm::load_gold(questions_path);
      std::vector<arm::MethodReport> reports;
      for (auto m : parse_methods(methods)) {
        reports.push_back(arm::run_eval(*engine, gold, m, config.jobs));
        if (!eval_trace.empty()) {
          for (const auto& row : reports.back().rows) arm::append_trace(eval_trace, row.trace);
        }
      }
      std::cout << arm::comparison_table(reports);
      if (!report_prefix.empty()) arm::write_reports(report_prefix, reports);
    } else if (gen->parsed()) {
      auto b = arm::generate_planted(planted);
      if (auto problems = arm::check_planted(b); !problems.empty()) {
        for (const auto& p : problems) std::cerr << p << "\n";
        return 1;
      }
      arm::save_planted(b, bench_out);
      std::cout << "objects " << b.objects.size() << "\nquestions " << b.questions.size() << "\n";
    } else if (validate->parsed()) {
      auto problems = arm::validate_trace_file(validate_path);
      for (const auto& p : problems) std::cerr << p << "\n";
      if (!problems.empty()) return 1;
      std::cout << "ok\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
