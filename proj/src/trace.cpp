#include "arm/trace.hpp"

#include <fstream>

#include "arm/error.hpp"

namespace arm {

using nlohmann::json;

json trace_record(std::string_view question_id, std::string_view question,
                  const RetrievalResult& result) {
  json ranked = json::array();
  for (std::size_t i = 0; i < result.ids.size(); ++i) {
    ranked.push_back({{"id", result.ids[i]}, {"score", result.scores.at(i)}});
  }
  return {{"version", kTraceVersion},
          {"question_id", question_id},
          {"question", question},
          {"method", method_name(result.method)},
          {"retrieved", ranked},
          {"llm_calls", result.llm_calls},
          {"objects_provided", result.objects_provided},
          {"details", result.details}};
}

namespace {

class Checker {
 public:
  explicit Checker(std::vector<std::string>& errors) : errors_(errors) {}

  bool has(const json& j, const char* key, json::value_t type, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) {
      errors_.push_back(where + ": missing '" + key + "'");
      return false;
    }
    const auto t = j.at(key).type();
    const bool number = type == json::value_t::number_float &&
                        (t == json::value_t::number_integer || t == json::value_t::number_unsigned);
    const bool unsigned_ok = type == json::value_t::number_unsigned && t == json::value_t::number_unsigned;
    if (t != type && !number && !unsigned_ok) {
      errors_.push_back(where + ": '" + key + "' has the wrong type");
      return false;
    }
    return true;
  }

  void strings(const json& j, const char* key, const std::string& where) {
    if (!has(j, key, json::value_t::array, where)) return;
    for (const auto& v : j.at(key)) {
      if (!v.is_string()) errors_.push_back(where + ": '" + key + "' must hold strings");
    }
  }

 private:
  std::vector<std::string>& errors_;
};

}  // namespace

std::vector<std::string> validate_trace_record(const json& r) {
  std::vector<std::string> errors;
  if (!r.is_object()) return {"record is not an object"};
  Checker c(errors);
  const auto u = json::value_t::number_unsigned;
  const auto f = json::value_t::number_float;
  const auto s = json::value_t::string;
  const auto a = json::value_t::array;
  if (c.has(r, "version", s, "record") && r["version"] != kTraceVersion) {
    errors.push_back("record: unsupported version " + r["version"].get<std::string>());
  }
  c.has(r, "question_id", s, "record");
  c.has(r, "question", s, "record");
  c.has(r, "llm_calls", u, "record");
  c.has(r, "objects_provided", u, "record");
  if (c.has(r, "retrieved", a, "record")) {
    for (const auto& e : r["retrieved"]) {
      c.has(e, "id", s, "retrieved");
      c.has(e, "score", f, "retrieved");
    }
  }
  if (!c.has(r, "method", s, "record")) return errors;
  Method m;
  try {
    m = parse_method(r["method"].get<std::string>());
  } catch (const ConfigError& e) {
    errors.push_back(std::string("record: ") + e.what());
    return errors;
  }
  if (!c.has(r, "details", json::value_t::object, "record")) return errors;
  const auto& d = r["details"];
  if (m == Method::Arm || m == Method::ArmIA || m == Method::ArmSA) {
    c.strings(d, "keywords", "details");
    c.strings(d, "after_ia", "details");
    c.strings(d, "after_sa", "details");
    c.strings(d, "final", "details");
    if (r.contains("llm_calls") && r["llm_calls"] != 1) {
      errors.push_back("record: arm methods make exactly one call");
    }
    if (c.has(d, "alignments", a, "details")) {
      for (const auto& al : d["alignments"]) {
        c.has(al, "keyword", s, "alignment");
        if (!c.has(al, "lists", a, "alignment")) continue;
        for (const auto& l : al["lists"]) {
          c.has(l, "score", f, "list");
          if (!c.has(l, "ngrams", a, "list")) continue;
          for (const auto& g : l["ngrams"]) {
            c.has(g, "text", s, "ngram");
            c.has(g, "score", f, "ngram");
          }
        }
      }
    }
    if (c.has(d, "bases", a, "details")) {
      for (const auto& base : d["bases"]) {
        if (!base.is_array()) {
          errors.push_back("bases: each base is a list");
          continue;
        }
        for (const auto& e : base) {
          c.has(e, "id", s, "base");
          c.has(e, "fused", f, "base");
        }
      }
    }
    if (c.has(d, "branches", a, "details")) {
      for (const auto& br : d["branches"]) {
        c.has(br, "beam", u, "branch");
        c.has(br, "strategy", a, "branch");
        c.strings(br, "search_set", "branch");
        if (c.has(br, "draft", json::value_t::object, "branch")) {
          c.strings(br["draft"], "objects", "draft");
          c.has(br["draft"], "links", a, "draft");
          c.has(br["draft"], "objective", f, "draft");
        }
        if (c.has(br, "selection", json::value_t::object, "branch")) {
          c.strings(br["selection"], "ids", "selection");
          c.has(br["selection"], "weights", a, "selection");
        }
      }
    }
    if (c.has(d, "confidence", a, "details")) {
      for (const auto& e : d["confidence"]) {
        c.has(e, "id", s, "confidence");
        c.has(e, "confidence", f, "confidence");
      }
    }
  } else if (m == Method::React) {
    c.has(d, "steps", a, "details");
    c.has(d, "stop", s, "details");
    if (c.has(d, "iterations", u, "details") && r.contains("llm_calls") &&
        r["llm_calls"].is_number_unsigned() &&
        r["llm_calls"].get<std::size_t>() + 1 != d["iterations"].get<std::size_t>()) {
      errors.push_back("record: react llm_calls must equal iterations - 1");
    }
  } else if (m == Method::DenseDecomp || m == Method::RerankDecomp) {
    c.strings(d, "sub_questions", "details");
  }
  return errors;
}

std::vector<std::string> validate_trace_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return {"cannot open " + path.string()};
  std::vector<std::string> errors;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      errors.push_back("line " + std::to_string(n) + ": " + e.what());
      continue;
    }
    for (auto& e : validate_trace_record(record)) errors.push_back("line " + std::to_string(n) + ": " + e);
  }
  if (n == 0) errors.push_back("trace file is empty");
  return errors;
}

void append_trace(const std::filesystem::path& path, const json& record) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error("cannot write trace " + path.string());
  out << record.dump() << '\n';
}

}  // namespace arm
