#include "arm/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "arm/error.hpp"
#include "arm/text.hpp"

namespace arm {

HashEmbeddingProvider::HashEmbeddingProvider(std::size_t dimension, std::uint64_t seed)
    : dimension_(dimension), seed_(seed) {
  if (dimension_ == 0) throw std::invalid_argument("embedding dimension must be >= 1");
}

Vector HashEmbeddingProvider::embed(std::string_view text) const {
  Vector v(dimension_, 0.0);
  for (const auto& tok : normalize_tokens(text)) {
    const auto h = stable_hash(tok, seed_);
    v[h % dimension_] += (h >> 63) ? -1.0 : 1.0;
  }
  const double n = norm(v);
  if (n > 0.0) {
    for (double& x : v) x /= n;
  }
  return v;
}

FileEmbeddingProvider::FileEmbeddingProvider(const std::filesystem::path& path,
                                             std::shared_ptr<const EmbeddingProvider> fallback)
    : fallback_(std::move(fallback)) {
  std::ifstream in(path);
  if (!in) throw ProviderError("cannot open vector file '" + path.string() + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(path.string() + ": " + e.what(), lineno);
    }
    Vector v;
    try {
      v = j.at("vector").get<Vector>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ": " + e.what(), lineno);
    }
    if (dimension_ == 0) dimension_ = v.size();
    if (v.size() != dimension_ || v.empty()) {
      throw ParseError(path.string() + ": inconsistent vector dimension", lineno);
    }
    if (j.contains("chunk_id")) {
      by_chunk_[j.at("chunk_id").get<std::string>()] = std::move(v);
    } else if (j.contains("text")) {
      by_text_[j.at("text").get<std::string>()] = std::move(v);
    } else {
      throw ParseError(path.string() + ": line needs chunk_id or text", lineno);
    }
  }
  if (dimension_ == 0) throw ProviderError("vector file '" + path.string() + "' is empty");
  if (fallback_ && fallback_->dimension() != dimension_) {
    throw DimensionMismatch("fallback provider dimension differs from vector file");
  }
}

Vector FileEmbeddingProvider::embed(std::string_view text) const {
  if (auto it = by_text_.find(text); it != by_text_.end()) return it->second;
  if (fallback_) return fallback_->embed(text);
  throw ProviderError("no precomputed vector for text '" + std::string(text.substr(0, 40)) + "'");
}

Vector FileEmbeddingProvider::embed_chunk(const Chunk& chunk) const {
  if (auto it = by_chunk_.find(chunk.key()); it != by_chunk_.end()) return it->second;
  return embed(chunk.text);
}

double dot(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw DimensionMismatch("dimension " + std::to_string(u.size()) + " vs " +
                            std::to_string(v.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

double norm(std::span<const double> u) {
  double s = 0.0;
  for (double x : u) s += x * x;
  return std::sqrt(s);
}

double cosine(std::span<const double> u, std::span<const double> v) {
  const double d = dot(u, v);
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu == 0.0 || nv == 0.0) throw ZeroVector("cosine of a zero vector");
  return std::clamp(d / (nu * nv), -1.0, 1.0);
}

double cosine_or_zero(std::span<const double> u, std::span<const double> v) {
  const double d = dot(u, v);
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(d / (nu * nv), -1.0, 1.0);
}

void VectorStore::add(const std::string& chunk_key, const std::string& object_id, Vector v) {
  if (dimension_ == 0) dimension_ = v.size();
  if (v.size() != dimension_) {
    throw DimensionMismatch("vector for '" + chunk_key + "' has dimension " +
                            std::to_string(v.size()) + ", store expects " +
                            std::to_string(dimension_));
  }
  if (!vectors_.emplace(chunk_key, std::move(v)).second) {
    throw ValidationError("duplicate vector for chunk '" + chunk_key + "'");
  }
  object_chunks_[object_id].push_back(chunk_key);
}

const Vector* VectorStore::find(std::string_view chunk_key) const {
  auto it = vectors_.find(chunk_key);
  return it == vectors_.end() ? nullptr : &it->second;
}

std::span<const std::string> VectorStore::chunks_of(std::string_view object_id) const {
  auto it = object_chunks_.find(object_id);
  if (it == object_chunks_.end()) return {};
  return it->second;
}

VectorStore embed_corpus(const EmbeddingProvider& provider, const Corpus& corpus) {
  VectorStore store(provider.dimension());
  for (const auto& chunk : corpus.chunks()) {
    Vector v;
    try {
      v = provider.embed_chunk(chunk);
    } catch (const std::exception& e) {
      throw ProviderError("chunk '" + chunk.key() + "': " + e.what());
    }
    store.add(chunk.key(), chunk.object_id, std::move(v));
  }
  return store;
}

double object_similarity(const VectorStore& store, std::span<const double> question,
                         const DataObject& object) {
  const auto keys = store.chunks_of(object.id);
  if (keys.empty()) throw MissingChunk("no chunk vectors for object '" + object.id + "'");
  double best = -1.0;
  for (const auto& key : keys) {
    const Vector* v = store.find(key);
    if (!v) throw MissingChunk("missing vector for chunk '" + key + "'");
    best = std::max(best, cosine_or_zero(question, *v));
  }
  return best;
}

TextEmbeddings::TextEmbeddings(std::shared_ptr<const EmbeddingProvider> provider)
    : provider_(std::move(provider)) {
  if (!provider_) throw std::invalid_argument("TextEmbeddings needs a provider");
}

const Vector& TextEmbeddings::get(const std::string& text) const {
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(text); it != cache_.end()) return it->second;
  }
  Vector v = provider_->embed(text);
  std::lock_guard lock(mu_);
  // emplace keeps the first writer's vector; providers are deterministic so
  // any concurrent duplicate is identical.
  return cache_.emplace(text, std::move(v)).first->second;
}

}  // namespace arm
