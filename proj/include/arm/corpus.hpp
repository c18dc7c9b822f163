#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace arm {

inline constexpr std::size_t kDefaultChunkUnits = 20;

enum class ObjectKind { Table, Passage };

std::string_view to_string(ObjectKind kind);

/// One table or passage; the unit of retrieval.
struct DataObject {
  std::string id;
  ObjectKind kind = ObjectKind::Passage;
  std::string title;
  std::optional<std::string> description;
  std::vector<std::string> columns;             // tables only
  std::vector<std::vector<std::string>> rows;   // tables only
  std::vector<std::string> sentences;           // passages only

  bool is_table() const { return kind == ObjectKind::Table; }
  /// Rows for tables, sentences for passages.
  std::size_t unit_count() const { return is_table() ? rows.size() : sentences.size(); }

  bool operator==(const DataObject&) const = default;
};

/// Half-open index range into an object's rows or sentences.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool operator==(const Span&) const = default;
};

struct Chunk {
  std::string object_id;
  std::size_t chunk_index = 0;
  Span span;
  std::string text;

  /// "<object_id>#<chunk_index>"; the key used by vector files and traces.
  std::string key() const;
  bool operator==(const Chunk&) const = default;
};

/// Throws ValidationError when the object breaks a structural invariant.
void validate_object(const DataObject& obj);

/// Title, description (if any) and, for tables, the column header row.
std::string serialize_header(const DataObject& obj);

/// A single table row as it appears in serialized text.
std::string render_row(const std::vector<std::string>& cells);

/// Header followed by the units in `span`.
std::string serialize_span(const DataObject& obj, Span span);

/// Whole-object serialization; equal to serialize_span over every unit.
std::string serialize_object(const DataObject& obj);

/// Disjoint windows of at most `max_units` rows/sentences, each chunk carrying
/// the object header. An object without units yields one header-only chunk.
std::vector<Chunk> chunk_object(const DataObject& obj, std::size_t max_units);

/// Immutable collection of validated objects and their chunks.
class Corpus {
 public:
  Corpus() = default;
  /// Validates every object and id uniqueness, then chunks.
  Corpus(std::vector<DataObject> objects, std::size_t max_units = kDefaultChunkUnits);

  const std::vector<DataObject>& objects() const { return objects_; }
  const std::vector<Chunk>& chunks() const { return chunks_; }
  std::size_t max_units() const { return max_units_; }

  const DataObject* find(std::string_view id) const;
  /// Throws ValidationError for an unknown id.
  const DataObject& object(std::string_view id) const;
  /// Indices into chunks() belonging to `id`, in chunk order.
  std::span<const std::size_t> chunks_of(std::string_view id) const;
  std::size_t index_of(std::string_view id) const;

  bool operator==(const Corpus& other) const {
    return objects_ == other.objects_ && chunks_ == other.chunks_;
  }

 private:
  std::vector<DataObject> objects_;
  std::vector<Chunk> chunks_;
  std::size_t max_units_ = kDefaultChunkUnits;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  std::vector<std::vector<std::size_t>> object_chunks_;
};

nlohmann::json object_to_json(const DataObject& obj);
/// Strict decoding: unknown or misplaced fields raise ValidationError.
DataObject object_from_json(const nlohmann::json& j);

Corpus load_corpus(const std::filesystem::path& path, std::size_t max_units = kDefaultChunkUnits);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// One line of the gold-label file.
struct GoldQuestion {
  std::string question_id;
  std::string question;
  std::vector<std::string> gold_object_ids;
  bool operator==(const GoldQuestion&) const = default;
};

std::vector<GoldQuestion> load_gold(const std::filesystem::path& path);
void save_gold(const std::vector<GoldQuestion>& questions, const std::filesystem::path& path);

}  // namespace arm
