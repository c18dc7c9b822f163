#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "arm/corpus.hpp"
#include "arm/metrics.hpp"
#include "arm/pipeline.hpp"

namespace arm {

struct QuestionRow {
  std::string question_id;
  std::vector<std::string> retrieved;
  Metrics metrics;
  std::size_t llm_calls = 0;
  std::size_t objects_provided = 0;
  nlohmann::json trace;
};

/// Macro averages; P, R, F1 and PR are percentages.
struct MethodReport {
  Method method = Method::Dense;
  std::vector<QuestionRow> rows;  // question order
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double perfect_recall = 0.0;
  double avg_llm_calls = 0.0;
  double avg_objects = 0.0;
};

/// Throws UnknownGoldId naming the question and id.
void check_gold(const Corpus& corpus, const std::vector<GoldQuestion>& questions);

MethodReport summarize(Method method, std::vector<QuestionRow> rows);

/// Questions run concurrently on `jobs` threads; rows keep question order.
MethodReport run_eval(const Engine& engine, const std::vector<GoldQuestion>& questions,
                      Method method, std::size_t jobs = 1);

nlohmann::json report_json(const std::vector<MethodReport>& reports);
std::string report_csv(const std::vector<MethodReport>& reports);
/// Fixed-width table with one row per method.
std::string comparison_table(const std::vector<MethodReport>& reports);

/// Writes <prefix>.json and <prefix>.csv.
void write_reports(const std::filesystem::path& prefix, const std::vector<MethodReport>& reports);

}  // namespace arm
