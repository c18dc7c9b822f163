#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "arm/corpus.hpp"
#include "arm/embedding.hpp"
#include "arm/lm.hpp"
#include "arm/mip.hpp"

namespace arm {

inline constexpr std::size_t kDraftUnitsPerObject = 5;

struct RenderedObject {
  std::string id;
  double relevance = 0.0;
  std::vector<std::size_t> units;  // kept rows or sentences, ascending
  std::string body;                // serialization restricted to `units`
};

struct SerializedDraft {
  std::vector<RenderedObject> objects;  // relevance desc, then id
  std::vector<std::string> connections;
  std::string text;

  std::vector<std::string> object_ids() const;
};

/// Indices of the `n` highest similarities (ties to the lower index), ascending.
std::vector<std::size_t> top_units(std::span<const double> similarity, std::size_t n);

/// Renders each draft object with its units most similar to the question,
/// followed by one line per link with a known connection.
SerializedDraft serialize_draft(const Draft& draft, std::span<const double> question_vec,
                                const VectorStore& store, const Corpus& corpus,
                                const TextEmbeddings& emb,
                                std::size_t units = kDraftUnitsPerObject);

/// Object ids go in as raw names, bodies and connections as normalized text.
void append_draft(Context& ctx, const SerializedDraft& draft);

struct BeamSelection {
  std::size_t beam = 0;
  std::vector<std::string> ids;  // selection order
  std::vector<double> weights;   // mean logit of each id's tokens
};

/// Picks draft objects one at a time until the stop symbol, which is offered
/// only after the first pick. Picks are separated by "|"; the tokens are
/// appended to `ctx`.
BeamSelection verify_select(TokenScorer& scorer, Context& ctx, const SerializedDraft& draft,
                            std::size_t beam = 0);

struct Confidence {
  std::string id;
  std::size_t votes = 0;
  double avg_weight = 0.0;
  double weight_norm = 0.0;
  double count_norm = 0.0;
  double confidence = 0.0;
};

struct ConfidenceTable {
  std::vector<Confidence> entries;  // confidence desc, then id
};

inline constexpr double kDefaultLambda = 0.5;

/// Weighted vote over beams. Average weights are min-max normalized across
/// voted objects (all 1 when they coincide); counts go through a softmax.
ConfidenceTable aggregate(const std::vector<BeamSelection>& selections,
                          double lambda = kDefaultLambda);

std::vector<std::string> finalize(const ConfidenceTable& table, std::size_t final_k);

}  // namespace arm
