#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "arm/lm.hpp"
#include "arm/struct_align.hpp"

namespace arm {

struct Config {
  std::filesystem::path corpus;
  std::filesystem::path index;    // snapshot; built in memory when empty
  std::string provider = "hash";  // "hash" or "file"
  std::filesystem::path vectors;  // JSONL for the file provider
  std::size_t dim = 64;

  double alpha = 0.5;
  double w = 0.5;
  double lambda = 0.5;
  std::size_t base_size = 10;
  std::size_t mip_k = 5;
  std::size_t final_k = 5;
  std::size_t beam_width = 3;
  std::size_t max_ngrams = 3;
  double prune_margin = std::numeric_limits<double>::infinity();
  std::vector<ExpansionStrategy> expansions = default_strategies();
  double k1 = 1.2;
  double b = 0.75;
  std::size_t chunk_units = 20;

  std::map<std::string, std::filesystem::path> prompts;
  std::uint64_t seed = 0;
  MockOptions mock;
  std::filesystem::path mock_script;  // JSON rules for the mock scorer

  std::size_t top_k = 5;
  std::size_t rerank_pool = 50;
  std::size_t decomp_per_sub = 30;
  std::size_t decomp_max_sub_questions = 6;
  std::size_t react_max_iterations = 8;
  std::size_t react_per_search = 5;
  std::size_t jobs = 1;

  /// Throws ConfigError when a weight leaves [0, 1] or a count is 0.
  void validate() const;
};

/// Strict: unknown keys raise ConfigError. Relative paths resolve against `base_dir`.
Config config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json config_to_json(const Config& c);
Config load_config(const std::filesystem::path& path);

}  // namespace arm
