#pragma once

#include <cstddef>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "arm/corpus.hpp"
#include "arm/embedding.hpp"

namespace arm {

inline constexpr double kDefaultCompatWeight = 0.5;

enum class ConnectionKind { JoinColumn, EntityLink, SentenceLink };

std::string_view to_string(ConnectionKind kind);

struct ColumnRef {
  std::size_t column = 0;
  bool operator==(const ColumnRef&) const = default;
};
struct CellRef {
  std::size_t row = 0;
  std::size_t column = 0;
  bool operator==(const CellRef&) const = default;
};
struct SentenceRef {
  std::size_t sentence = 0;
  bool operator==(const SentenceRef&) const = default;
};
using Locator = std::variant<ColumnRef, CellRef, SentenceRef>;

struct Endpoint {
  std::string object_id;
  Locator locator;
  bool operator==(const Endpoint&) const = default;
};

/// The best-matching parts of two objects. For entity links `a` is the table.
struct Connection {
  ConnectionKind kind = ConnectionKind::JoinColumn;
  Endpoint a;
  Endpoint b;
  double score = 0.0;
  bool operator==(const Connection&) const = default;
};

struct Compatibility {
  double score = 0.0;
  std::optional<Connection> connection;  // absent when nothing was comparable
};

struct Column {
  std::string header;
  std::vector<std::string> values;
};

Column column_of(const DataObject& table, std::size_t column);

/// Semantic parts use max(0, cosine) so every score stays in [0, 1].
double semantic_similarity(const TextEmbeddings& emb, const std::string& a, const std::string& b);

/// w * semantic(headers) + (1 - w) * Jaccard(value sets).
double column_compat(const TextEmbeddings& emb, const Column& a, const Column& b, double w);

/// Best column pair. Throws NotATable.
Compatibility table_table_compat(const TextEmbeddings& emb, const DataObject& a,
                                 const DataObject& b, double w);
/// Best (cell, sentence) pair scored with the overlap coefficient.
Compatibility table_passage_compat(const TextEmbeddings& emb, const DataObject& table,
                                   const DataObject& passage, double w);
/// Best sentence pair scored with the overlap coefficient.
Compatibility passage_passage_compat(const TextEmbeddings& emb, const DataObject& a,
                                     const DataObject& b, double w);
/// Dispatches on the object kinds.
Compatibility object_compat(const TextEmbeddings& emb, const DataObject& a, const DataObject& b,
                            double w);

/// "column c1 in t1 connects with column c2 in t2" for joins,
/// "cell in t connects with sentence in p" for entity links.
std::string describe(const Connection& c, const Corpus& corpus);

/// Pairwise compatibility oracle over a fixed universe of object ids.
class CompatSource {
 public:
  virtual ~CompatSource() = default;
  virtual double score(const std::string& a, const std::string& b) const = 0;
  virtual const std::vector<std::string>& universe() const = 0;
};

/// Lazily computed, thread-safe cache over the corpus keyed by unordered pair.
class CompatibilityMatrix final : public CompatSource {
 public:
  CompatibilityMatrix(const Corpus& corpus, const TextEmbeddings& emb,
                      double w = kDefaultCompatWeight);

  const Compatibility& get(const std::string& a, const std::string& b) const;
  double score(const std::string& a, const std::string& b) const override;
  const std::vector<std::string>& universe() const override { return ids_; }
  double weight() const { return w_; }
  std::size_t cached_pairs() const;

 private:
  const Corpus* corpus_;
  const TextEmbeddings* emb_;
  double w_;
  std::vector<std::string> ids_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<std::string, std::string>, Compatibility> cache_;
};

}  // namespace arm
