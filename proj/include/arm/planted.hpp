#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "arm/corpus.hpp"

namespace arm {

/// Synthetic multi-hop benchmark. Each question matches a table A by its
/// title. A bridge table B shares no token with the question but repeats A's
/// join column header and its values. A passage D matches the question and
/// names an entity listed in B.
struct PlantedOptions {
  std::size_t questions = 20;
  std::size_t passage_every = 1;  // questions q with q % passage_every == 0 get a passage
  std::size_t rows = 6;
  std::size_t shared_codes = 6;  // join values B copies from A
  std::uint64_t seed = 7;
};

struct PlantedQuestion {
  GoldQuestion gold;
  std::string matched_table;
  std::string bridge_table;
  std::string linked_passage;  // empty for two-object questions
};

struct PlantedBench {
  std::vector<DataObject> objects;
  std::vector<PlantedQuestion> questions;

  std::vector<GoldQuestion> gold() const;
};

PlantedBench generate_planted(const PlantedOptions& options = {});

/// Checks the planted structure: bridges share no question token, join
/// columns have identical headers and value Jaccard >= 0.8, gold ids resolve.
std::vector<std::string> check_planted(const PlantedBench& bench);

/// Writes corpus.jsonl and questions.jsonl into `dir`.
void save_planted(const PlantedBench& bench, const std::filesystem::path& dir);

}  // namespace arm
