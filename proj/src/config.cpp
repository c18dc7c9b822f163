#include "arm/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "arm/error.hpp"

namespace arm {

using nlohmann::json;

void Config::validate() const {
  auto weight = [](const char* name, double v) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0, 1]");
  };
  auto count = [](const char* name, std::size_t v) {
    if (v == 0) throw ConfigError(std::string(name) + " must be at least 1");
  };
  weight("alpha", alpha);
  weight("w", w);
  weight("lambda", lambda);
  count("dim", dim);
  count("base_size", base_size);
  count("mip_k", mip_k);
  count("final_k", final_k);
  count("beam_width", beam_width);
  count("max_ngrams", max_ngrams);
  count("chunk_units", chunk_units);
  count("top_k", top_k);
  count("rerank_pool", rerank_pool);
  count("decomp_per_sub", decomp_per_sub);
  count("decomp_max_sub_questions", decomp_max_sub_questions);
  count("react_max_iterations", react_max_iterations);
  count("react_per_search", react_per_search);
  count("jobs", jobs);
  if (expansions.empty()) throw ConfigError("expansions must list at least one strategy");
  for (const auto& s : expansions) {
    if (s.per_step == 0 || s.steps == 0) throw ConfigError("expansion counts must be at least 1");
  }
  if (!(k1 >= 0.0) || !(b >= 0.0 && b <= 1.0)) throw ConfigError("invalid BM25 parameters");
  if (!(prune_margin > 0.0)) throw ConfigError("prune_margin must be positive");
  if (provider != "hash" && provider != "file") {
    throw ConfigError("unknown provider '" + provider + "'");
  }
  if (provider == "file" && vectors.empty()) throw ConfigError("file provider needs 'vectors'");
}

namespace {

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

void read_path(const json& j, const char* key, std::filesystem::path& out,
               const std::filesystem::path& base) {
  std::string s;
  read(j, key, s);
  if (s.empty()) return;
  std::filesystem::path p(s);
  out = p.is_relative() && !base.empty() ? base / p : p;
}

}  // namespace

Config config_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {
      "corpus", "index", "provider", "vectors", "dim", "alpha", "w", "lambda", "base_size",
      "mip_k", "final_k", "beam_width", "max_ngrams", "prune_margin", "expansions", "k1", "b",
      "chunk_units", "prompts", "seed", "mock", "mock_script", "top_k", "rerank_pool",
      "decomp_per_sub", "decomp_max_sub_questions", "react_max_iterations", "react_per_search",
      "jobs"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  Config c;
  read_path(j, "corpus", c.corpus, base_dir);
  read_path(j, "index", c.index, base_dir);
  read(j, "provider", c.provider);
  read_path(j, "vectors", c.vectors, base_dir);
  read(j, "dim", c.dim);
  read(j, "alpha", c.alpha);
  read(j, "w", c.w);
  read(j, "lambda", c.lambda);
  read(j, "base_size", c.base_size);
  read(j, "mip_k", c.mip_k);
  read(j, "final_k", c.final_k);
  read(j, "beam_width", c.beam_width);
  read(j, "max_ngrams", c.max_ngrams);
  if (j.contains("prune_margin") && !j.at("prune_margin").is_null()) {
    read(j, "prune_margin", c.prune_margin);
  }
  if (j.contains("expansions")) {
    c.expansions.clear();
    for (const auto& e : j.at("expansions")) {
      if (!e.is_array() || e.size() != 2) throw ConfigError("expansions entries are [k, l] pairs");
      if (!e[0].is_number_unsigned() || !e[1].is_number_unsigned()) {
        throw ConfigError("expansions entries are non-negative integers");
      }
      c.expansions.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>()});
    }
  }
  read(j, "k1", c.k1);
  read(j, "b", c.b);
  read(j, "chunk_units", c.chunk_units);
  if (j.contains("prompts")) {
    for (const auto& [name, path] : j.at("prompts").items()) {
      std::filesystem::path p(path.get<std::string>());
      c.prompts[name] = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
  }
  read(j, "seed", c.seed);
  if (j.contains("mock")) {
    const auto& m = j.at("mock");
    static const std::set<std::string> mock_keys = {"copy_bias", "recency_bias", "recency_window",
                                                    "noise"};
    for (const auto& [key, value] : m.items()) {
      if (!mock_keys.count(key)) throw ConfigError("unknown mock option '" + key + "'");
    }
    read(m, "copy_bias", c.mock.copy_bias);
    read(m, "recency_bias", c.mock.recency_bias);
    read(m, "recency_window", c.mock.recency_window);
    read(m, "noise", c.mock.noise);
  }
  read_path(j, "mock_script", c.mock_script, base_dir);
  read(j, "top_k", c.top_k);
  read(j, "rerank_pool", c.rerank_pool);
  read(j, "decomp_per_sub", c.decomp_per_sub);
  read(j, "decomp_max_sub_questions", c.decomp_max_sub_questions);
  read(j, "react_max_iterations", c.react_max_iterations);
  read(j, "react_per_search", c.react_per_search);
  read(j, "jobs", c.jobs);
  c.validate();
  return c;
}

json config_to_json(const Config& c) {
  json j;
  j["corpus"] = c.corpus.string();
  j["index"] = c.index.string();
  j["provider"] = c.provider;
  j["vectors"] = c.vectors.string();
  j["dim"] = c.dim;
  j["alpha"] = c.alpha;
  j["w"] = c.w;
  j["lambda"] = c.lambda;
  j["base_size"] = c.base_size;
  j["mip_k"] = c.mip_k;
  j["final_k"] = c.final_k;
  j["beam_width"] = c.beam_width;
  j["max_ngrams"] = c.max_ngrams;
  j["prune_margin"] = std::isinf(c.prune_margin) ? json(nullptr) : json(c.prune_margin);
  j["expansions"] = json::array();
  for (const auto& s : c.expansions) j["expansions"].push_back({s.per_step, s.steps});
  j["k1"] = c.k1;
  j["b"] = c.b;
  j["chunk_units"] = c.chunk_units;
  j["prompts"] = json::object();
  for (const auto& [k, v] : c.prompts) j["prompts"][k] = v.string();
  j["seed"] = c.seed;
  j["mock"] = {{"copy_bias", c.mock.copy_bias},
               {"recency_bias", c.mock.recency_bias},
               {"recency_window", c.mock.recency_window},
               {"noise", c.mock.noise}};
  j["mock_script"] = c.mock_script.string();
  j["top_k"] = c.top_k;
  j["rerank_pool"] = c.rerank_pool;
  j["decomp_per_sub"] = c.decomp_per_sub;
  j["decomp_max_sub_questions"] = c.decomp_max_sub_questions;
  j["react_max_iterations"] = c.react_max_iterations;
  j["react_per_search"] = c.react_per_search;
  j["jobs"] = c.jobs;
  return j;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

}  // namespace arm
