#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "arm/corpus.hpp"

namespace arm {

using Vector = std::vector<double>;

/// Text -> fixed-dimension vector. Implementations must be deterministic and
/// safe to call concurrently.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string name() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual Vector embed(std::string_view text) const = 0;
  /// Defaults to embedding the chunk text.
  virtual Vector embed_chunk(const Chunk& chunk) const { return embed(chunk.text); }
};

/// Seeded signed feature hashing of normalized token counts, unit-normalized.
/// Text without tokens maps to the zero vector.
class HashEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HashEmbeddingProvider(std::size_t dimension = 64, std::uint64_t seed = 0);
  std::string name() const override { return "hash"; }
  std::size_t dimension() const override { return dimension_; }
  Vector embed(std::string_view text) const override;

 private:
  std::size_t dimension_;
  std::uint64_t seed_;
};

/// Precomputed vectors read from JSONL lines {"chunk_id": ..., "vector": [...]}
/// or {"text": ..., "vector": [...]}. Texts absent from the file go to the
/// fallback provider when one is given, otherwise raise ProviderError.
class FileEmbeddingProvider final : public EmbeddingProvider {
 public:
  FileEmbeddingProvider(const std::filesystem::path& path,
                        std::shared_ptr<const EmbeddingProvider> fallback = nullptr);
  std::string name() const override { return "file"; }
  std::size_t dimension() const override { return dimension_; }
  Vector embed(std::string_view text) const override;
  Vector embed_chunk(const Chunk& chunk) const override;

 private:
  std::size_t dimension_ = 0;
  std::map<std::string, Vector, std::less<>> by_chunk_;
  std::map<std::string, Vector, std::less<>> by_text_;
  std::shared_ptr<const EmbeddingProvider> fallback_;
};

double dot(std::span<const double> u, std::span<const double> v);
double norm(std::span<const double> u);

/// Throws DimensionMismatch or ZeroVector. Result clamped to [-1, 1].
double cosine(std::span<const double> u, std::span<const double> v);
/// Same as cosine but a zero vector on either side scores 0.
double cosine_or_zero(std::span<const double> u, std::span<const double> v);

/// One vector per corpus chunk.
class VectorStore {
 public:
  explicit VectorStore(std::size_t dimension = 0) : dimension_(dimension) {}

  /// Throws DimensionMismatch or ValidationError on a duplicate key.
  void add(const std::string& chunk_key, const std::string& object_id, Vector v);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return vectors_.size(); }
  const Vector* find(std::string_view chunk_key) const;
  /// Chunk keys registered for an object, in insertion order.
  std::span<const std::string> chunks_of(std::string_view object_id) const;

  bool operator==(const VectorStore&) const = default;

 private:
  std::size_t dimension_;
  std::map<std::string, Vector, std::less<>> vectors_;
  std::map<std::string, std::vector<std::string>, std::less<>> object_chunks_;
};

/// Throws ProviderError naming the chunk when the provider fails.
VectorStore embed_corpus(const EmbeddingProvider& provider, const Corpus& corpus);

/// Max cosine between the question and any chunk of the object (zero vectors
/// score 0). Throws MissingChunk when the store has no chunk for the object.
double object_similarity(const VectorStore& store, std::span<const double> question,
                         const DataObject& object);

/// Thread-safe memo over a provider for short texts (questions, headers,
/// cells, sentences). Returned references stay valid for the cache lifetime.
class TextEmbeddings {
 public:
  explicit TextEmbeddings(std::shared_ptr<const EmbeddingProvider> provider);
  const Vector& get(const std::string& text) const;
  const EmbeddingProvider& provider() const { return *provider_; }

 private:
  std::shared_ptr<const EmbeddingProvider> provider_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::string, Vector> cache_;
};

}  // namespace arm
