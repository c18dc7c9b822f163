#include "arm/verify_agg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "arm/compatibility.hpp"
#include "arm/struct_align.hpp"
#include "arm/text.hpp"

namespace arm {

std::vector<std::string> SerializedDraft::object_ids() const {
  std::vector<std::string> out;
  for (const auto& o : objects) out.push_back(o.id);
  return out;
}

std::vector<std::size_t> top_units(std::span<const double> similarity, std::size_t n) {
  std::vector<std::size_t> idx(similarity.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](auto a, auto b) { return similarity[a] > similarity[b]; });
  if (idx.size() > n) idx.resize(n);
  std::sort(idx.begin(), idx.end());
  return idx;
}

SerializedDraft serialize_draft(const Draft& draft, std::span<const double> question_vec,
                                const VectorStore& store, const Corpus& corpus,
                                const TextEmbeddings& emb, std::size_t units) {
  SerializedDraft out;
  for (const auto& id : draft.objects) {
    const auto& obj = corpus.object(id);
    RenderedObject r;
    r.id = id;
    r.relevance = relevance(store, question_vec, obj);
    std::vector<double> sims;
    for (std::size_t u = 0; u < obj.unit_count(); ++u) {
      const std::string text = obj.is_table() ? render_row(obj.rows[u]) : obj.sentences[u];
      sims.push_back(cosine_or_zero(question_vec, emb.get(text)));
    }
    r.units = top_units(sims, units);
    DataObject kept = obj;
    if (obj.is_table()) {
      kept.rows.clear();
      for (auto u : r.units) kept.rows.push_back(obj.rows[u]);
    } else {
      kept.sentences.clear();
      for (auto u : r.units) kept.sentences.push_back(obj.sentences[u]);
    }
    r.body = serialize_object(kept);
    out.objects.push_back(std::move(r));
  }
  std::stable_sort(out.objects.begin(), out.objects.end(), [](const auto& a, const auto& b) {
    return a.relevance != b.relevance ? a.relevance > b.relevance : a.id < b.id;
  });
  for (const auto& link : draft.links) {
    if (link.connection) out.connections.push_back(describe(*link.connection, corpus));
  }
  for (const auto& o : out.objects) out.text += o.id + ": " + o.body + "\n";
  for (const auto& c : out.connections) out.text += c + "\n";
  return out;
}

void append_draft(Context& ctx, const SerializedDraft& draft) {
  for (const auto& o : draft.objects) {
    ctx.name(o.id).text(o.body).special(Special::Newline);
  }
  for (const auto& c : draft.connections) ctx.text(c).special(Special::Newline);
}

BeamSelection verify_select(TokenScorer& scorer, Context& ctx, const SerializedDraft& draft,
                            std::size_t beam) {
  if (draft.objects.empty()) throw std::invalid_argument("verify_select: empty draft");
  auto& vocab = scorer.vocab();
  BeamSelection sel;
  sel.beam = beam;
  std::vector<std::string> remaining = draft.object_ids();
  const TokenId sep = token(Special::ListSep);
  while (!remaining.empty()) {
    std::vector<std::vector<TokenId>> options;
    for (const auto& id : remaining) options.push_back(vocab.encode_name(id));
    if (!sel.ids.empty()) options.push_back({token(Special::Stop)});
    auto choice = choose_sequence(scorer, ctx.ids(), options, sep);
    ctx.append(choice.emitted);
    if (choice.index == remaining.size()) break;  // stop symbol
    if (choice.emitted.empty() || choice.emitted.back() != sep) {
      ctx.append(std::span(&sep, 1));
    }
    sel.ids.push_back(remaining[choice.index]);
    sel.weights.push_back(ngram_score(choice.logits));
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(choice.index));
  }
  return sel;
}

ConfidenceTable aggregate(const std::vector<BeamSelection>& selections, double lambda) {
  if (selections.empty()) throw std::invalid_argument("aggregate needs at least one beam");
  if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("lambda must lie in [0, 1]");
  std::map<std::string, std::vector<double>> votes;
  for (const auto& s : selections) {
    for (std::size_t i = 0; i < s.ids.size(); ++i) votes[s.ids[i]].push_back(s.weights.at(i));
  }
  ConfidenceTable table;
  if (votes.empty()) return table;
  for (auto& [id, w] : votes) {
    std::sort(w.begin(), w.end());  // summation order independent of beam order
    Confidence c;
    c.id = id;
    c.votes = w.size();
    c.avg_weight = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
    table.entries.push_back(c);
  }
  auto [lo_it, hi_it] = std::minmax_element(
      table.entries.begin(), table.entries.end(),
      [](const auto& a, const auto& b) { return a.avg_weight < b.avg_weight; });
  const double lo = lo_it->avg_weight, hi = hi_it->avg_weight;
  std::size_t max_votes = 0;
  for (const auto& c : table.entries) max_votes = std::max(max_votes, c.votes);
  double z = 0.0;
  for (const auto& c : table.entries) {
    z += std::exp(static_cast<double>(c.votes) - static_cast<double>(max_votes));
  }
  for (auto& c : table.entries) {
    c.weight_norm = hi > lo ? (c.avg_weight - lo) / (hi - lo) : 1.0;
    c.count_norm = std::exp(static_cast<double>(c.votes) - static_cast<double>(max_votes)) / z;
    c.confidence = lambda * c.weight_norm + (1.0 - lambda) * c.count_norm;
  }
  std::sort(table.entries.begin(), table.entries.end(), [](const auto& a, const auto& b) {
    return a.confidence != b.confidence ? a.confidence > b.confidence : a.id < b.id;
  });
  return table;
}

std::vector<std::string> finalize(const ConfidenceTable& table, std::size_t final_k) {
  if (final_k == 0) throw std::invalid_argument("final_k must be at least 1");
  std::vector<std::string> out;
  for (const auto& c : table.entries) {
    if (out.size() == final_k) break;
    out.push_back(c.id);
  }
  return out;
}

}  // namespace arm
