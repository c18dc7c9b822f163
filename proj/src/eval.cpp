#include "arm/eval.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "arm/error.hpp"
#include "arm/text.hpp"
#include "arm/trace.hpp"

namespace arm {

using nlohmann::json;

void check_gold(const Corpus& corpus, const std::vector<GoldQuestion>& questions) {
  for (const auto& q : questions) {
    if (q.gold_object_ids.empty()) throw EmptyGold("question '" + q.question_id + "' has no gold");
    for (const auto& id : q.gold_object_ids) {
      if (!corpus.find(id)) {
        throw UnknownGoldId("question '" + q.question_id + "' names unknown object '" + id + "'");
      }
    }
  }
}

MethodReport summarize(Method method, std::vector<QuestionRow> rows) {
  MethodReport r;
  r.method = method;
  r.rows = std::move(rows);
  if (r.rows.empty()) return r;
  for (const auto& row : r.rows) {
    r.precision += row.metrics.precision;
    r.recall += row.metrics.recall;
    r.f1 += row.metrics.f1;
    r.perfect_recall += row.metrics.perfect_recall ? 1.0 : 0.0;
    r.avg_llm_calls += static_cast<double>(row.llm_calls);
    r.avg_objects += static_cast<double>(row.objects_provided);
  }
  const double n = static_cast<double>(r.rows.size());
  r.precision = 100.0 * r.precision / n;
  r.recall = 100.0 * r.recall / n;
  r.f1 = 100.0 * r.f1 / n;
  r.perfect_recall = 100.0 * r.perfect_recall / n;
  r.avg_llm_calls /= n;
  r.avg_objects /= n;
  return r;
}

MethodReport run_eval(const Engine& engine, const std::vector<GoldQuestion>& questions,
                      Method method, std::size_t jobs) {
  check_gold(engine.corpus(), questions);
  std::vector<QuestionRow> rows(questions.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < questions.size();) {
      try {
        const auto& q = questions[i];
        auto result = engine.retrieve(q.question, method);
        QuestionRow& row = rows[i];
        row.question_id = q.question_id;
        row.retrieved = result.ids;
        row.metrics = compute_metrics(result.ids, q.gold_object_ids);
        row.llm_calls = result.llm_calls;
        row.objects_provided = result.objects_provided;
        row.trace = trace_record(q.question_id, q.question, result);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = questions.size();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, questions.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return summarize(method, std::move(rows));
}

namespace {

std::string fixed(double v) { return format_fixed(v, 4); }

}  // namespace

json report_json(const std::vector<MethodReport>& reports) {
  json out = json::array();
  for (const auto& r : reports) {
    json rows = json::array();
    for (const auto& row : r.rows) {
      rows.push_back({{"question_id", row.question_id},
                      {"retrieved", row.retrieved},
                      {"precision", fixed(row.metrics.precision)},
                      {"recall", fixed(row.metrics.recall)},
                      {"f1", fixed(row.metrics.f1)},
                      {"perfect_recall", row.metrics.perfect_recall},
                      {"llm_calls", row.llm_calls},
                      {"objects_provided", row.objects_provided}});
    }
    out.push_back({{"method", method_name(r.method)},
                   {"questions", r.rows.size()},
                   {"P", fixed(r.precision)},
                   {"R", fixed(r.recall)},
                   {"F1", fixed(r.f1)},
                   {"PR", fixed(r.perfect_recall)},
                   {"llm_calls", fixed(r.avg_llm_calls)},
                   {"avg_objects", fixed(r.avg_objects)},
                   {"rows", rows}});
  }
  return out;
}

std::string report_csv(const std::vector<MethodReport>& reports) {
  std::ostringstream os;
  os << "method,questions,P,R,F1,PR,llm_calls,avg_objects\n";
  for (const auto& r : reports) {
    os << method_name(r.method) << ',' << r.rows.size() << ',' << fixed(r.precision) << ','
       << fixed(r.recall) << ',' << fixed(r.f1) << ',' << fixed(r.perfect_recall) << ','
       << fixed(r.avg_llm_calls) << ',' << fixed(r.avg_objects) << '\n';
  }
  return os.str();
}

std::string comparison_table(const std::vector<MethodReport>& reports) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-14s %7s %7s %7s %7s %7s %9s\n", "method", "P", "R", "F1",
                "PR", "#calls", "#obj");
  os << line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-14s %7.1f %7.1f %7.1f %7.1f %7.2f %9.2f\n",
                  std::string(method_name(r.method)).c_str(), r.precision, r.recall, r.f1,
                  r.perfect_recall, r.avg_llm_calls, r.avg_objects);
    os << line;
  }
  return os.str();
}

void write_reports(const std::filesystem::path& prefix, const std::vector<MethodReport>& reports) {
  const auto json_path = std::filesystem::path(prefix.string() + ".json");
  const auto csv_path = std::filesystem::path(prefix.string() + ".csv");
  std::ofstream j(json_path, std::ios::binary);
  std::ofstream c(csv_path, std::ios::binary);
  if (!j || !c) throw Error("cannot write report " + prefix.string());
  j << report_json(reports).dump(2) << '\n';
  c << report_csv(reports);
}

}  // namespace arm
