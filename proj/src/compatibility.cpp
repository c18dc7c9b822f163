#include "arm/compatibility.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "arm/error.hpp"
#include "arm/text.hpp"

namespace arm {

std::string_view to_string(ConnectionKind kind) {
  switch (kind) {
    case ConnectionKind::JoinColumn:
      return "join_column";
    case ConnectionKind::EntityLink:
      return "entity_link";
    case ConnectionKind::SentenceLink:
      return "sentence_link";
  }
  return "?";
}

Column column_of(const DataObject& table, std::size_t column) {
  if (!table.is_table()) throw NotATable("'" + table.id + "' is not a table");
  Column col{table.columns.at(column), {}};
  col.values.reserve(table.rows.size());
  for (const auto& row : table.rows) col.values.push_back(row.at(column));
  return col;
}

double semantic_similarity(const TextEmbeddings& emb, const std::string& a, const std::string& b) {
  return std::max(0.0, cosine_or_zero(emb.get(a), emb.get(b)));
}

namespace {

std::set<std::string> value_set(const std::vector<std::string>& values) {
  std::set<std::string> out;
  for (const auto& v : values) {
    auto t = trim(v);
    if (!t.empty()) out.insert(std::move(t));
  }
  return out;
}

void check_weight(double w) {
  if (w < 0.0 || w > 1.0) throw std::invalid_argument("compatibility weight must lie in [0, 1]");
}

}  // namespace

double column_compat(const TextEmbeddings& emb, const Column& a, const Column& b, double w) {
  check_weight(w);
  return w * semantic_similarity(emb, a.header, b.header) +
         (1.0 - w) * jaccard(value_set(a.values), value_set(b.values));
}

Compatibility table_table_compat(const TextEmbeddings& emb, const DataObject& a,
                                 const DataObject& b, double w) {
  if (!a.is_table()) throw NotATable("'" + a.id + "' is not a table");
  if (!b.is_table()) throw NotATable("'" + b.id + "' is not a table");
  check_weight(w);
  std::vector<Column> cols_b;
  std::vector<std::set<std::string>> values_b;
  for (std::size_t j = 0; j < b.columns.size(); ++j) {
    cols_b.push_back(column_of(b, j));
    values_b.push_back(value_set(cols_b.back().values));
  }
  Compatibility best;
  for (std::size_t i = 0; i < a.columns.size(); ++i) {
    const auto col_a = column_of(a, i);
    const auto values_a = value_set(col_a.values);
    for (std::size_t j = 0; j < cols_b.size(); ++j) {
      const double s = w * semantic_similarity(emb, col_a.header, cols_b[j].header) +
                       (1.0 - w) * jaccard(values_a, values_b[j]);
      if (!best.connection || s > best.score) {
        best.score = s;
        best.connection = Connection{ConnectionKind::JoinColumn,
                                     Endpoint{a.id, ColumnRef{i}},
                                     Endpoint{b.id, ColumnRef{j}}, s};
      }
    }
  }
  return best;
}

namespace {

struct Unit {
  std::string text;
  std::set<std::string> tokens;
};

Compatibility best_unit_pair(const TextEmbeddings& emb, const std::vector<Unit>& left,
                             const std::vector<Locator>& left_loc, const std::string& left_id,
                             const std::vector<Unit>& right, const std::vector<Locator>& right_loc,
                             const std::string& right_id, ConnectionKind kind, double w) {
  check_weight(w);
  Compatibility best;
  for (std::size_t i = 0; i < left.size(); ++i) {
    for (std::size_t j = 0; j < right.size(); ++j) {
      const double s = w * semantic_similarity(emb, left[i].text, right[j].text) +
                       (1.0 - w) * overlap_coefficient(left[i].tokens, right[j].tokens);
      if (!best.connection || s > best.score) {
        best.score = s;
        best.connection =
            Connection{kind, Endpoint{left_id, left_loc[i]}, Endpoint{right_id, right_loc[j]}, s};
      }
    }
  }
  return best;
}

void sentence_units(const DataObject& p, std::vector<Unit>& units, std::vector<Locator>& locs) {
  for (std::size_t s = 0; s < p.sentences.size(); ++s) {
    units.push_back(Unit{p.sentences[s], token_set(p.sentences[s])});
    locs.emplace_back(SentenceRef{s});
  }
}

}  // namespace

Compatibility table_passage_compat(const TextEmbeddings& emb, const DataObject& table,
                                   const DataObject& passage, double w) {
  if (!table.is_table()) throw NotATable("'" + table.id + "' is not a table");
  if (passage.is_table()) throw std::invalid_argument("'" + passage.id + "' is not a passage");
  std::vector<Unit> cells, sentences;
  std::vector<Locator> cell_locs, sentence_locs;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      cells.push_back(Unit{table.rows[r][c], token_set(table.rows[r][c])});
      cell_locs.emplace_back(CellRef{r, c});
    }
  }
  sentence_units(passage, sentences, sentence_locs);
  return best_unit_pair(emb, cells, cell_locs, table.id, sentences, sentence_locs, passage.id,
                        ConnectionKind::EntityLink, w);
}

Compatibility passage_passage_compat(const TextEmbeddings& emb, const DataObject& a,
                                     const DataObject& b, double w) {
  if (a.is_table() || b.is_table()) throw std::invalid_argument("passage pair expected");
  std::vector<Unit> ua, ub;
  std::vector<Locator> la, lb;
  sentence_units(a, ua, la);
  sentence_units(b, ub, lb);
  return best_unit_pair(emb, ua, la, a.id, ub, lb, b.id, ConnectionKind::SentenceLink, w);
}

Compatibility object_compat(const TextEmbeddings& emb, const DataObject& a, const DataObject& b,
                            double w) {
  if (a.is_table() && b.is_table()) return table_table_compat(emb, a, b, w);
  if (a.is_table()) return table_passage_compat(emb, a, b, w);
  if (b.is_table()) return table_passage_compat(emb, b, a, w);
  return passage_passage_compat(emb, a, b, w);
}

std::string describe(const Connection& c, const Corpus& corpus) {
  const auto& a = corpus.object(c.a.object_id);
  const auto& b = corpus.object(c.b.object_id);
  auto part = [&](const DataObject& obj, const Locator& loc) -> std::string {
    if (const auto* col = std::get_if<ColumnRef>(&loc)) return obj.columns.at(col->column);
    if (const auto* cell = std::get_if<CellRef>(&loc)) return obj.rows.at(cell->row).at(cell->column);
    return obj.sentences.at(std::get<SentenceRef>(loc).sentence);
  };
  if (c.kind == ConnectionKind::JoinColumn) {
    return "column " + part(a, c.a.locator) + " in " + a.id + " connects with column " +
           part(b, c.b.locator) + " in " + b.id;
  }
  return part(a, c.a.locator) + " in " + a.id + " connects with " + part(b, c.b.locator) + " in " +
         b.id;
}

CompatibilityMatrix::CompatibilityMatrix(const Corpus& corpus, const TextEmbeddings& emb,
                                         double w)
    : corpus_(&corpus), emb_(&emb), w_(w) {
  check_weight(w);
  for (const auto& obj : corpus.objects()) ids_.push_back(obj.id);
  std::sort(ids_.begin(), ids_.end());
}

const Compatibility& CompatibilityMatrix::get(const std::string& a, const std::string& b) const {
  if (a == b) throw std::invalid_argument("compatibility of an object with itself");
  auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  auto value = object_compat(*emb_, corpus_->object(key.first), corpus_->object(key.second), w_);
  std::lock_guard lock(mu_);
  return cache_.emplace(std::move(key), std::move(value)).first->second;
}

double CompatibilityMatrix::score(const std::string& a, const std::string& b) const {
  return get(a, b).score;
}

std::size_t CompatibilityMatrix::cached_pairs() const {
  std::lock_guard lock(mu_);
  return cache_.size();
}

}  // namespace arm
