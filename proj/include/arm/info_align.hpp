#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "arm/corpus.hpp"
#include "arm/embedding.hpp"
#include "arm/lm.hpp"
#include "arm/ngram_index.hpp"

namespace arm {

/// Decodes keywords after `ctx` as contiguous, non-overlapping substrings of
/// the normalized question, in question order, separated by "|" and ended by
/// "<nl>". The generated tokens are appended to `ctx`. If the scorer ends
/// before any keyword, the whole normalized question is the single keyword.
std::vector<std::string> extract_keywords(TokenScorer& scorer, Context& ctx,
                                          std::string_view question);
/// Convenience form with a minimal prompt.
std::vector<std::string> extract_keywords(TokenScorer& scorer, std::string_view question);

/// One decoded n-gram list for a keyword (one beam).
struct AlignedList {
  std::vector<NGramHit> ngrams;  // sorted by n-gram score, descending
  double score = 0.0;            // beam segment score
  std::vector<TokenId> tokens;   // "(" ... ")" as emitted, for context replay

  /// All n-gram tokens concatenated: the BM25 query for this list.
  std::vector<std::string> query_terms() const;
};

struct KeywordAlignment {
  std::string keyword;
  std::vector<AlignedList> lists;  // one per surviving beam, best first
};

/// Rephrases `keyword` into indexed n-grams. `ctx` is the decoding context up
/// to (not including) the keyword. All-dead decoding yields no lists.
KeywordAlignment align_keyword(TokenScorer& scorer, const NGramTrie& trie,
                               std::span<const TokenId> ctx, std::string_view keyword,
                               const NGramDecodeOptions& options);
KeywordAlignment align_keyword(TokenScorer& scorer, const NGramTrie& trie,
                               std::string_view keyword, const NGramDecodeOptions& options);

struct BaseEntry {
  std::string object_id;
  double fused = 0.0;
  double bm25 = 0.0;   // min-max normalized within the question
  double embed = 0.0;  // object similarity clamped to [0, 1]
};

struct BaseSet {
  std::vector<BaseEntry> entries;  // fused desc, ties by id asc
  std::vector<std::string> ids() const;
};

struct FusionParams {
  double alpha = 0.5;
  std::size_t base_size = 10;
  std::size_t bm25_depth = 100;  // chunks fetched per query
};

/// fused = alpha * bm25 + (1 - alpha) * embed, then the top `base_size`.
BaseSet fuse_components(std::vector<BaseEntry> entries, double alpha, std::size_t base_size);

/// One BM25 query per n-gram list; per-object lexical score is the max chunk
/// score over all queries, min-max normalized over the objects hit.
BaseSet retrieve_base(std::span<const double> question_vec,
                      const std::vector<KeywordAlignment>& alignments, const Bm25Index& bm25,
                      const Corpus& corpus, const VectorStore& store, const FusionParams& params);
BaseSet retrieve_base(std::string_view question, const std::vector<KeywordAlignment>& alignments,
                      const Bm25Index& bm25, const Corpus& corpus, const VectorStore& store,
                      const EmbeddingProvider& provider, const FusionParams& params);

}  // namespace arm
