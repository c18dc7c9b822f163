#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "arm/baselines.hpp"
#include "arm/compatibility.hpp"
#include "arm/config.hpp"
#include "arm/corpus.hpp"
#include "arm/embedding.hpp"
#include "arm/info_align.hpp"
#include "arm/lm.hpp"
#include "arm/mip.hpp"
#include "arm/ngram_index.hpp"
#include "arm/prompts.hpp"
#include "arm/struct_align.hpp"
#include "arm/verify_agg.hpp"

namespace arm {

enum class Method { Dense, Rerank, DenseDecomp, RerankDecomp, React, Arm, ArmIA, ArmSA };

std::string_view method_name(Method m);
/// Throws ConfigError for an unknown name.
Method parse_method(std::string_view name);

/// One (decode beam, expansion strategy) branch of an ARM run.
struct ArmBranch {
  std::size_t beam = 0;
  ExpansionStrategy strategy;
  SearchSet search;
  MipInstance instance;
  Draft draft;
  SerializedDraft rendered;
  BeamSelection selection;
};

struct ArmOutcome {
  std::vector<std::string> keywords;
  std::vector<KeywordAlignment> alignments;
  std::vector<BaseSet> bases;  // one per decode beam
  std::vector<ArmBranch> branches;
  ConfidenceTable confidence;
  std::vector<std::string> after_ia;  // top of the first base set
  std::vector<std::string> after_sa;  // best draft by objective
  std::vector<std::string> final;     // after verification and voting
  std::size_t llm_calls = 0;
};

struct RetrievalResult {
  Method method = Method::Arm;
  std::vector<std::string> ids;
  std::vector<double> scores;
  std::size_t llm_calls = 0;
  std::size_t objects_provided = 0;
  nlohmann::json details = nlohmann::json::object();
};

/// Corpus, indexes and caches shared by every question. Safe for concurrent
/// retrieve() calls; each call builds its own scorer.
class Engine {
 public:
  Engine(Config config, Corpus corpus, CorpusIndex index,
         std::shared_ptr<const EmbeddingProvider> provider);
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  /// Loads the corpus, the index snapshot (or builds it) and the provider.
  static std::unique_ptr<Engine> open(const Config& config);

  const Config& config() const { return config_; }
  const Corpus& corpus() const { return corpus_; }
  const CorpusIndex& index() const { return index_; }
  const VectorStore& store() const { return store_; }
  const TextEmbeddings& embeddings() const { return *emb_; }
  const CompatibilityMatrix& compat() const { return *compat_; }
  const PromptSet& prompts() const { return prompts_; }

  std::unique_ptr<TokenScorer> make_scorer() const;

  ArmOutcome run_arm(TokenScorer& scorer, std::string_view question) const;
  RetrievalResult retrieve(std::string_view question, Method method) const;
  RetrievalResult retrieve(TokenScorer& scorer, std::string_view question, Method method) const;

 private:
  Config config_;
  Corpus corpus_;
  CorpusIndex index_;
  std::shared_ptr<const EmbeddingProvider> provider_;
  VectorStore store_;
  std::unique_ptr<TextEmbeddings> emb_;
  std::unique_ptr<CompatibilityMatrix> compat_;
  PromptSet prompts_;
  nlohmann::json mock_script_;
};

nlohmann::json arm_details(const ArmOutcome& outcome);

}  // namespace arm
