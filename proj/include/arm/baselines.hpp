#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "arm/corpus.hpp"
#include "arm/embedding.hpp"
#include "arm/lm.hpp"

namespace arm {

struct ScoredObject {
  std::string id;
  double score = 0.0;
};

/// Scores a (question, object) pair; higher is better.
class Reranker {
 public:
  virtual ~Reranker() = default;
  virtual double score(std::string_view question, const DataObject& object) const = 0;
};

/// Overlap coefficient between question tokens and serialized object tokens.
class OverlapReranker final : public Reranker {
 public:
  double score(std::string_view question, const DataObject& object) const override;
};

/// Objects by max chunk cosine, ties by id.
std::vector<ScoredObject> dense_retrieve(std::span<const double> question_vec,
                                         const VectorStore& store, const Corpus& corpus,
                                         std::size_t top_k);

/// Dense top `pool`, rescored by `reranker`, ties by dense rank.
std::vector<ScoredObject> rerank_retrieve(std::string_view question,
                                          std::span<const double> question_vec,
                                          const VectorStore& store, const Corpus& corpus,
                                          const Reranker& reranker, std::size_t pool,
                                          std::size_t top_k);

struct DecompositionOptions {
  std::size_t per_sub = 30;
  std::size_t max_sub_questions = 6;
  std::size_t max_tokens = 96;
};

struct DecompositionResult {
  std::vector<std::string> sub_questions;
  std::vector<ScoredObject> objects;
  std::size_t llm_calls = 0;
};

/// Splits generated text on newlines into sub-questions (the original question
/// when none come out), unions their dense results and rescores the union with
/// the reranker, or with the best dense score when `reranker` is null.
DecompositionResult decomposed_retrieve(TokenScorer& scorer, std::string_view prompt,
                                        std::string_view question,
                                        const TextEmbeddings& emb, const VectorStore& store,
                                        const Corpus& corpus, const Reranker* reranker,
                                        std::size_t top_k, const DecompositionOptions& options = {});

enum class AgentAction { Search, Finish, Malformed };
enum class AgentStop { Finish, IterationCap, Malformed };

std::string_view to_string(AgentAction a);
std::string_view to_string(AgentStop s);

struct ParsedAction {
  AgentAction action = AgentAction::Malformed;
  std::string argument;
};

/// First "Search[...]" or "Finish[...]" in the text, case-insensitive.
ParsedAction parse_action(std::string_view text);

struct AgentStep {
  std::string output;  // generated text of the iteration
  ParsedAction action;
  std::vector<std::string> observation;  // object ids shown afterwards
};

struct AgentTranscript {
  std::vector<AgentStep> steps;
  AgentStop stop = AgentStop::IterationCap;
  std::size_t iterations() const { return steps.size(); }
};

struct AgentResult {
  std::vector<std::string> retrieved;  // distinct ids in first-shown order
  std::size_t objects_shown = 0;       // with repeats
  std::size_t llm_calls = 0;           // iterations - 1
  AgentTranscript transcript;
};

using SearchFn = std::function<std::vector<std::string>(const std::string& query, std::size_t k)>;

struct AgentOptions {
  std::size_t max_iterations = 8;
  std::size_t per_search = 5;
  std::size_t max_tokens = 64;
};

/// ReAct loop. Each iteration generates one line; a Search result is shown to
/// the scorer only when another iteration follows.
AgentResult agentic_retrieve(TokenScorer& scorer, std::string_view prompt, const SearchFn& search,
                             const Corpus& corpus, const AgentOptions& options = {});

}  // namespace arm
