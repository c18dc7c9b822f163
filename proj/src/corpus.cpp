#include "arm/corpus.hpp"

#include <fstream>
#include <set>

#include "arm/error.hpp"
#include "arm/text.hpp"

namespace arm {

using nlohmann::json;

std::string_view to_string(ObjectKind kind) {
  return kind == ObjectKind::Table ? "table" : "passage";
}

std::string Chunk::key() const { return object_id + "#" + std::to_string(chunk_index); }

void validate_object(const DataObject& obj) {
  const auto fail = [&](const std::string& why) {
    throw ValidationError("object '" + obj.id + "': " + why);
  };
  if (obj.id.empty()) throw ValidationError("object with empty id");
  if (obj.is_table()) {
    if (obj.columns.empty()) fail("table has no columns");
    if (!obj.sentences.empty()) fail("table carries sentences");
    for (std::size_t r = 0; r < obj.rows.size(); ++r) {
      if (obj.rows[r].size() != obj.columns.size()) {
        fail("row " + std::to_string(r) + " has " + std::to_string(obj.rows[r].size()) +
             " cells but " + std::to_string(obj.columns.size()) + " columns");
      }
    }
  } else {
    if (obj.sentences.empty()) fail("passage has no sentences");
    if (!obj.columns.empty() || !obj.rows.empty()) fail("passage carries columns or rows");
  }
}

std::string render_row(const std::vector<std::string>& cells) {
  return join(cells, kFieldDelimiter);
}

std::string serialize_header(const DataObject& obj) {
  std::string out = obj.title;
  if (obj.description && !obj.description->empty()) {
    out += kFieldDelimiter;
    out += *obj.description;
  }
  if (obj.is_table()) {
    out += kFieldDelimiter;
    out += render_row(obj.columns);
  }
  return out;
}

std::string serialize_span(const DataObject& obj, Span span) {
  std::string out = serialize_header(obj);
  if (obj.is_table()) {
    // First row continues the header line; later rows start their own line.
    for (std::size_t r = span.begin; r < span.end; ++r) {
      out += r == span.begin ? std::string(kFieldDelimiter) : std::string("\n| ");
      out += render_row(obj.rows[r]);
    }
  } else if (span.size() > 0) {
    std::vector<std::string> part(obj.sentences.begin() + static_cast<std::ptrdiff_t>(span.begin),
                                  obj.sentences.begin() + static_cast<std::ptrdiff_t>(span.end));
    out += kFieldDelimiter;
    out += join(part, " ");
  }
  return out;
}

std::string serialize_object(const DataObject& obj) {
  return serialize_span(obj, Span{0, obj.unit_count()});
}

std::vector<Chunk> chunk_object(const DataObject& obj, std::size_t max_units) {
  if (max_units == 0) throw std::invalid_argument("chunk_object: max_units must be >= 1");
  std::vector<Chunk> out;
  const std::size_t n = obj.unit_count();
  if (n == 0) {
    out.push_back(Chunk{obj.id, 0, Span{0, 0}, serialize_span(obj, Span{0, 0})});
    return out;
  }
  for (std::size_t begin = 0, idx = 0; begin < n; begin += max_units, ++idx) {
    Span span{begin, std::min(n, begin + max_units)};
    out.push_back(Chunk{obj.id, idx, span, serialize_span(obj, span)});
  }
  return out;
}

Corpus::Corpus(std::vector<DataObject> objects, std::size_t max_units)
    : objects_(std::move(objects)), max_units_(max_units) {
  if (max_units_ == 0) throw ValidationError("chunk units must be >= 1");
  object_chunks_.resize(objects_.size());
  for (std::size_t i = 0; i < objects_.size(); ++i) {
    validate_object(objects_[i]);
    if (!by_id_.emplace(objects_[i].id, i).second) {
      throw ValidationError("duplicate object id '" + objects_[i].id + "'");
    }
    for (auto& chunk : chunk_object(objects_[i], max_units_)) {
      object_chunks_[i].push_back(chunks_.size());
      chunks_.push_back(std::move(chunk));
    }
  }
}

const DataObject* Corpus::find(std::string_view id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &objects_[it->second];
}

const DataObject& Corpus::object(std::string_view id) const {
  return objects_[index_of(id)];
}

std::size_t Corpus::index_of(std::string_view id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw ValidationError("unknown object id '" + std::string(id) + "'");
  return it->second;
}

std::span<const std::size_t> Corpus::chunks_of(std::string_view id) const {
  return object_chunks_[index_of(id)];
}

json object_to_json(const DataObject& obj) {
  json j;
  j["id"] = obj.id;
  j["kind"] = to_string(obj.kind);
  j["title"] = obj.title;
  if (obj.description) j["description"] = *obj.description;
  if (obj.is_table()) {
    j["columns"] = obj.columns;
    j["rows"] = obj.rows;
  } else {
    j["sentences"] = obj.sentences;
  }
  return j;
}

namespace {

template <typename T>
T field(const json& j, const char* name, const std::string& id) {
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("object '" + id + "': field '" + name + "' missing or mistyped");
  }
}

}  // namespace

DataObject object_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("corpus line is not a JSON object");
  DataObject obj;
  obj.id = field<std::string>(j, "id", "?");
  const auto kind = field<std::string>(j, "kind", obj.id);
  if (kind == "table") {
    obj.kind = ObjectKind::Table;
  } else if (kind == "passage") {
    obj.kind = ObjectKind::Passage;
  } else {
    throw ValidationError("object '" + obj.id + "': unknown kind '" + kind + "'");
  }
  obj.title = field<std::string>(j, "title", obj.id);
  if (j.contains("description")) obj.description = field<std::string>(j, "description", obj.id);

  static const std::set<std::string> table_keys{"id", "kind", "title", "description", "columns",
                                                "rows"};
  static const std::set<std::string> passage_keys{"id", "kind", "title", "description",
                                                  "sentences"};
  const auto& allowed = obj.is_table() ? table_keys : passage_keys;
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) {
      throw ValidationError("object '" + obj.id + "': unexpected field '" + key + "' for " +
                            std::string(to_string(obj.kind)));
    }
  }
  if (obj.is_table()) {
    obj.columns = field<std::vector<std::string>>(j, "columns", obj.id);
    obj.rows = j.contains("rows") ? field<std::vector<std::vector<std::string>>>(j, "rows", obj.id)
                                  : std::vector<std::vector<std::string>>{};
  } else {
    obj.sentences = field<std::vector<std::string>>(j, "sentences", obj.id);
  }
  validate_object(obj);
  return obj;
}

namespace {

template <typename Fn>
void for_each_json_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(path.string() + ": " + e.what(), lineno);
    }
    fn(j, lineno);
  }
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& path, std::size_t max_units) {
  std::vector<DataObject> objects;
  for_each_json_line(path, [&](const json& j, std::size_t) {
    objects.push_back(object_from_json(j));
  });
  return Corpus(std::move(objects), max_units);
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  for (const auto& obj : corpus.objects()) out << object_to_json(obj).dump() << '\n';
}

std::vector<GoldQuestion> load_gold(const std::filesystem::path& path) {
  std::vector<GoldQuestion> out;
  for_each_json_line(path, [&](const json& j, std::size_t lineno) {
    try {
      GoldQuestion q;
      q.question_id = j.at("question_id").get<std::string>();
      q.question = j.at("question").get<std::string>();
      q.gold_object_ids = j.at("gold_object_ids").get<std::vector<std::string>>();
      out.push_back(std::move(q));
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ": " + e.what(), lineno);
    }
  });
  return out;
}

void save_gold(const std::vector<GoldQuestion>& questions, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  for (const auto& q : questions) {
    json j{{"question_id", q.question_id},
           {"question", q.question},
           {"gold_object_ids", q.gold_object_ids}};
    out << j.dump() << '\n';
  }
}

}  // namespace arm
