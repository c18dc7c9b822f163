#include "arm/ngram_index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "arm/error.hpp"
#include "arm/text.hpp"

namespace arm {

using nlohmann::json;

std::string NGram::text() const { return join(tokens, " "); }

std::set<NGram> extract_ngrams(std::string_view text) {
  const auto tokens = normalize_tokens(text);
  std::set<NGram> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (std::size_t n = 1; n <= kMaxNGram && i + n <= tokens.size(); ++n) {
      out.insert(NGram{{tokens.begin() + static_cast<std::ptrdiff_t>(i),
                        tokens.begin() + static_cast<std::ptrdiff_t>(i + n)}});
    }
  }
  return out;
}

std::set<NGram> extract_ngrams(const Chunk& chunk) { return extract_ngrams(chunk.text); }

// --- trie -------------------------------------------------------------------

NGramTrie::NGramTrie() : nodes_(1) {}

NGramTrie NGramTrie::build(const std::set<NGram>& grams) {
  NGramTrie trie;
  for (const auto& g : grams) trie.insert(g.tokens);
  return trie;
}

void NGramTrie::insert(std::span<const std::string> tokens) {
  if (tokens.empty() || tokens.size() > kMaxNGram) {
    throw std::invalid_argument("n-gram length must be 1..3");
  }
  std::size_t node = 0;
  for (const auto& tok : tokens) {
    if (tok.empty()) throw std::invalid_argument("empty n-gram token");
    auto it = nodes_[node].children.find(tok);
    if (it == nodes_[node].children.end()) {
      const auto next = static_cast<std::uint32_t>(nodes_.size());
      nodes_[node].children.emplace(tok, next);
      nodes_.emplace_back();
      node = next;
    } else {
      node = it->second;
    }
  }
  if (!nodes_[node].terminal) {
    nodes_[node].terminal = true;
    ++terminals_;
  }
}

std::size_t NGramTrie::locate(std::span<const std::string> prefix) const {
  std::size_t node = 0;
  for (const auto& tok : prefix) {
    auto it = nodes_[node].children.find(tok);
    if (it == nodes_[node].children.end()) return std::numeric_limits<std::size_t>::max();
    node = it->second;
  }
  return node;
}

bool NGramTrie::contains(std::span<const std::string> tokens) const {
  if (tokens.empty()) return false;
  const auto node = locate(tokens);
  return node != std::numeric_limits<std::size_t>::max() && nodes_[node].terminal;
}

NGramTrie::Continuations NGramTrie::valid_continuations(
    std::span<const std::string> prefix) const {
  Continuations out;
  const auto node = locate(prefix);
  if (node == std::numeric_limits<std::size_t>::max()) return out;
  for (const auto& [tok, _] : nodes_[node].children) out.next.push_back(tok);
  out.can_terminate = !prefix.empty() && nodes_[node].terminal;
  return out;
}

std::vector<NGram> NGramTrie::enumerate() const {
  std::vector<NGram> out;
  std::vector<std::string> path;
  auto walk = [&](auto&& self, std::size_t node) -> void {
    if (nodes_[node].terminal) out.push_back(NGram{path});
    for (const auto& [tok, child] : nodes_[node].children) {
      path.push_back(tok);
      self(self, child);
      path.pop_back();
    }
  };
  walk(walk, 0);
  return out;
}

json NGramTrie::to_json() const {
  auto encode = [&](auto&& self, std::size_t node) -> json {
    json j;
    j["t"] = nodes_[node].terminal;
    json children = json::object();
    for (const auto& [tok, child] : nodes_[node].children) children[tok] = self(self, child);
    j["c"] = std::move(children);
    return j;
  };
  return encode(encode, 0);
}

NGramTrie NGramTrie::from_json(const json& j) {
  NGramTrie trie;
  std::vector<std::string> path;
  auto decode = [&](auto&& self, const json& node) -> void {
    if (!node.is_object() || !node.contains("t") || !node.contains("c")) {
      throw SnapshotError("malformed trie node");
    }
    if (node.at("t").get<bool>()) trie.insert(path);
    for (const auto& [tok, child] : node.at("c").items()) {
      path.push_back(tok);
      self(self, child);
      path.pop_back();
    }
  };
  decode(decode, j);
  return trie;
}

// --- BM25 -------------------------------------------------------------------

Bm25Index Bm25Index::build(const std::vector<Chunk>& chunks, Bm25Params params) {
  Bm25Index idx;
  idx.params_ = params;
  std::size_t total = 0;
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    idx.chunk_ids_.emplace_back(chunks[c].object_id, chunks[c].chunk_index);
    const auto tokens = normalize_tokens(chunks[c].text);
    idx.doc_lengths_.push_back(tokens.size());
    total += tokens.size();
    std::map<std::string, std::uint32_t> tf;
    for (const auto& t : tokens) ++tf[t];
    for (const auto& [term, n] : tf) {
      idx.postings_[term].push_back(Posting{static_cast<std::uint32_t>(c), n});
    }
  }
  idx.avg_length_ = chunks.empty() ? 0.0 : static_cast<double>(total) / chunks.size();
  return idx;
}

const std::vector<Bm25Index::Posting>* Bm25Index::postings(std::string_view term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? nullptr : &it->second;
}

std::size_t Bm25Index::document_frequency(std::string_view term) const {
  const auto* p = postings(term);
  return p ? p->size() : 0;
}

double Bm25Index::idf(std::string_view term) const {
  const double n = static_cast<double>(doc_count());
  const double df = static_cast<double>(document_frequency(term));
  // The +1 keeps idf positive even for terms present in most chunks.
  return std::log((n - df + 0.5) / (df + 0.5) + 1.0);
}

std::vector<ScoredChunk> Bm25Index::search(std::span<const std::string> query_terms,
                                           std::size_t top_k) const {
  if (top_k == 0) throw std::invalid_argument("bm25 search: top_k must be >= 1");
  std::set<std::string, std::less<>> unique(query_terms.begin(), query_terms.end());
  std::map<std::size_t, double> acc;
  for (const auto& term : unique) {
    const auto* plist = postings(term);
    if (!plist) continue;
    const double w = idf(term);
    for (const auto& p : *plist) {
      const double tf = p.tf;
      const double norm = params_.k1 * (1.0 - params_.b +
                                        params_.b * static_cast<double>(doc_lengths_[p.chunk]) /
                                            avg_length_);
      acc[p.chunk] += w * tf * (params_.k1 + 1.0) / (tf + norm);
    }
  }
  std::vector<ScoredChunk> out;
  out.reserve(acc.size());
  for (const auto& [chunk, score] : acc) out.push_back({chunk, score});
  std::sort(out.begin(), out.end(), [&](const ScoredChunk& a, const ScoredChunk& b) {
    if (a.score != b.score) return a.score > b.score;
    return chunk_ids_[a.chunk] < chunk_ids_[b.chunk];
  });
  if (out.size() > top_k) out.resize(top_k);
  return out;
}

json Bm25Index::to_json() const {
  json j;
  j["k1"] = params_.k1;
  j["b"] = params_.b;
  j["doc_lengths"] = doc_lengths_;
  j["avg_doc_length"] = avg_length_;
  json ids = json::array();
  for (const auto& [obj, idx] : chunk_ids_) ids.push_back(json::array({obj, idx}));
  j["chunk_ids"] = std::move(ids);
  json inv = json::object();
  for (const auto& [term, plist] : postings_) {
    json arr = json::array();
    for (const auto& p : plist) arr.push_back(json::array({p.chunk, p.tf}));
    inv[term] = {{"df", plist.size()}, {"postings", std::move(arr)}};
  }
  j["inverted"] = std::move(inv);
  return j;
}

Bm25Index Bm25Index::from_json(const json& j) {
  try {
    Bm25Index idx;
    idx.params_.k1 = j.at("k1").get<double>();
    idx.params_.b = j.at("b").get<double>();
    idx.doc_lengths_ = j.at("doc_lengths").get<std::vector<std::size_t>>();
    idx.avg_length_ = j.at("avg_doc_length").get<double>();
    for (const auto& pair : j.at("chunk_ids")) {
      idx.chunk_ids_.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<std::size_t>());
    }
    for (const auto& [term, entry] : j.at("inverted").items()) {
      auto& plist = idx.postings_[term];
      for (const auto& p : entry.at("postings")) {
        plist.push_back(Posting{p.at(0).get<std::uint32_t>(), p.at(1).get<std::uint32_t>()});
      }
      if (entry.at("df").get<std::size_t>() != plist.size()) {
        throw SnapshotError("document frequency mismatch for '" + term + "'");
      }
    }
    return idx;
  } catch (const json::exception& e) {
    throw SnapshotError(std::string("malformed bm25 section: ") + e.what());
  }
}

std::vector<ScoredChunk> bm25_search(const Bm25Index& index,
                                     std::span<const std::string> query_terms,
                                     std::size_t top_k) {
  return index.search(query_terms, top_k);
}

// --- snapshot ---------------------------------------------------------------

CorpusIndex build_index(const Corpus& corpus, Bm25Params params) {
  CorpusIndex idx;
  idx.chunk_units = corpus.max_units();
  std::set<NGram> grams;
  for (const auto& chunk : corpus.chunks()) {
    idx.chunk_keys.push_back(chunk.key());
    grams.merge(extract_ngrams(chunk));
  }
  idx.trie = NGramTrie::build(grams);
  idx.bm25 = Bm25Index::build(corpus.chunks(), params);
  return idx;
}

void save_index(const CorpusIndex& index, const std::filesystem::path& path) {
  json j;
  j["format"] = kIndexFormatTag;
  j["chunk_units"] = index.chunk_units;
  j["chunk_keys"] = index.chunk_keys;
  j["ngram_count"] = index.trie.size();
  j["trie"] = index.trie.to_json();
  j["bm25"] = index.bm25.to_json();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << j.dump() << '\n';
}

CorpusIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError("cannot open index '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SnapshotError("index '" + path.string() + "': " + e.what());
  }
  if (!j.is_object() || j.value("format", "") != kIndexFormatTag) {
    throw SnapshotError("index '" + path.string() + "' has unsupported format tag");
  }
  CorpusIndex idx;
  try {
    idx.chunk_units = j.at("chunk_units").get<std::size_t>();
    idx.chunk_keys = j.at("chunk_keys").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw SnapshotError(std::string("malformed index header: ") + e.what());
  }
  idx.trie = NGramTrie::from_json(j.at("trie"));
  idx.bm25 = Bm25Index::from_json(j.at("bm25"));
  if (idx.trie.size() != j.value("ngram_count", std::size_t{0})) {
    throw SnapshotError("n-gram count mismatch in index snapshot");
  }
  return idx;
}

void check_index_matches(const CorpusIndex& index, const Corpus& corpus) {
  if (index.chunk_units != corpus.max_units()) {
    throw SnapshotError("index built with chunk units " + std::to_string(index.chunk_units) +
                        ", corpus chunked with " + std::to_string(corpus.max_units()));
  }
  if (index.chunk_keys.size() != corpus.chunks().size()) {
    throw SnapshotError("index chunk count does not match corpus");
  }
  for (std::size_t i = 0; i < index.chunk_keys.size(); ++i) {
    if (index.chunk_keys[i] != corpus.chunks()[i].key()) {
      throw SnapshotError("index chunk '" + index.chunk_keys[i] + "' does not match corpus");
    }
  }
}

}  // namespace arm
