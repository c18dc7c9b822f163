#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "arm/corpus.hpp"

namespace arm {

inline constexpr std::size_t kMaxNGram = 3;

/// 1..3 normalized tokens.
struct NGram {
  std::vector<std::string> tokens;

  std::string text() const;
  std::size_t size() const { return tokens.size(); }
  auto operator<=>(const NGram&) const = default;
  bool operator==(const NGram&) const = default;
};

/// Every contiguous window of 1..3 normalized tokens, deduplicated.
std::set<NGram> extract_ngrams(std::string_view text);
std::set<NGram> extract_ngrams(const Chunk& chunk);

/// Token-level prefix tree over indexed N-grams. Nodes live in a flat vector
/// so the trie copies and compares by value.
class NGramTrie {
 public:
  struct Continuations {
    std::vector<std::string> next;  // sorted
    bool can_terminate = false;
  };

  NGramTrie();
  static NGramTrie build(const std::set<NGram>& grams);

  void insert(std::span<const std::string> tokens);
  bool contains(std::span<const std::string> tokens) const;
  bool contains(const NGram& gram) const { return contains(gram.tokens); }

  /// Children of the prefix node and whether the prefix is itself indexed.
  /// Unknown prefixes yield ({}, false).
  Continuations valid_continuations(std::span<const std::string> prefix) const;

  std::size_t size() const { return terminals_; }
  std::size_t node_count() const { return nodes_.size(); }
  bool empty() const { return terminals_ == 0; }
  std::vector<NGram> enumerate() const;

  /// Nested {"t": terminal, "c": {token: node}} encoding.
  nlohmann::json to_json() const;
  static NGramTrie from_json(const nlohmann::json& j);

  bool operator==(const NGramTrie&) const = default;

 private:
  struct Node {
    bool terminal = false;
    std::map<std::string, std::uint32_t, std::less<>> children;
    bool operator==(const Node&) const = default;
  };
  // Index of the node reached by `prefix`, or npos.
  std::size_t locate(std::span<const std::string> prefix) const;

  std::vector<Node> nodes_;
  std::size_t terminals_ = 0;
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
  bool operator==(const Bm25Params&) const = default;
};

struct ScoredChunk {
  std::size_t chunk = 0;  // index into the chunk list the index was built from
  double score = 0.0;
};

/// Okapi BM25 over chunk texts.
class Bm25Index {
 public:
  struct Posting {
    std::uint32_t chunk;
    std::uint32_t tf;
    bool operator==(const Posting&) const = default;
  };

  Bm25Index() = default;
  static Bm25Index build(const std::vector<Chunk>& chunks, Bm25Params params = {});

  /// Ranked by score desc, ties by chunk id (object id, then chunk index)
  /// ascending. Duplicate query terms count once. Returns an empty list when
  /// no term is in the vocabulary.
  std::vector<ScoredChunk> search(std::span<const std::string> query_terms,
                                  std::size_t top_k) const;

  double idf(std::string_view term) const;
  std::size_t document_frequency(std::string_view term) const;
  std::size_t doc_count() const { return doc_lengths_.size(); }
  std::size_t doc_length(std::size_t chunk) const { return doc_lengths_[chunk]; }
  double avg_doc_length() const { return avg_length_; }
  const Bm25Params& params() const { return params_; }
  const std::vector<Posting>* postings(std::string_view term) const;
  std::size_t vocabulary_size() const { return postings_.size(); }

  nlohmann::json to_json() const;
  static Bm25Index from_json(const nlohmann::json& j);

  bool operator==(const Bm25Index&) const = default;

 private:
  Bm25Params params_;
  std::vector<std::pair<std::string, std::size_t>> chunk_ids_;  // (object id, chunk index)
  std::vector<std::size_t> doc_lengths_;
  double avg_length_ = 0.0;
  std::map<std::string, std::vector<Posting>, std::less<>> postings_;
};

std::vector<ScoredChunk> bm25_search(const Bm25Index& index,
                                     std::span<const std::string> query_terms,
                                     std::size_t top_k);

/// Everything the lexical side of retrieval needs, built from one corpus.
struct CorpusIndex {
  std::size_t chunk_units = kDefaultChunkUnits;
  NGramTrie trie;
  Bm25Index bm25;
  std::vector<std::string> chunk_keys;
  std::size_t ngram_count() const { return trie.size(); }
};

CorpusIndex build_index(const Corpus& corpus, Bm25Params params = {});

inline constexpr std::string_view kIndexFormatTag = "arm-index/1";

void save_index(const CorpusIndex& index, const std::filesystem::path& path);
/// Throws SnapshotError on a format-tag mismatch or malformed file.
CorpusIndex load_index(const std::filesystem::path& path);
/// Throws SnapshotError unless the snapshot was built from this corpus.
void check_index_matches(const CorpusIndex& index, const Corpus& corpus);

}  // namespace arm
