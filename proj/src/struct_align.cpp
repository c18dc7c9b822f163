#include "arm/struct_align.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace arm {

std::vector<ExpansionStrategy> default_strategies() { return {{1, 1}, {2, 1}, {1, 2}}; }

std::vector<SearchSet> expand_base(const std::vector<std::string>& base, const CompatSource& compat,
                                   const std::vector<ExpansionStrategy>& strategies) {
  if (base.empty()) throw std::invalid_argument("expansion needs a non-empty base");
  std::vector<SearchSet> out;
  for (const auto& strategy : strategies) {
    if (strategy.per_step == 0 || strategy.steps == 0) {
      throw std::invalid_argument("expansion strategy counts must be at least 1");
    }
    std::set<std::string> members(base.begin(), base.end());
    for (std::size_t step = 0; step < strategy.steps; ++step) {
      const std::set<std::string> present = members;
      for (const auto& m : present) {
        std::vector<std::pair<double, const std::string*>> ranked;
        for (const auto& cand : compat.universe()) {
          if (present.count(cand)) continue;
          const double c = compat.score(m, cand);
          if (c > 0.0) ranked.emplace_back(c, &cand);
        }
        const std::size_t take = std::min(strategy.per_step, ranked.size());
        std::partial_sort(ranked.begin(), ranked.begin() + take, ranked.end(),
                          [](const auto& a, const auto& b) {
                            return a.first != b.first ? a.first > b.first : *a.second < *b.second;
                          });
        for (std::size_t t = 0; t < take; ++t) members.insert(*ranked[t].second);
      }
    }
    out.push_back({strategy, {members.begin(), members.end()}});
  }
  return out;
}

double relevance(const VectorStore& store, std::span<const double> question_vec,
                 const DataObject& object) {
  return std::clamp(object_similarity(store, question_vec, object), 0.0, 1.0);
}

MipInstance build_instance(const SearchSet& set,
                           const std::function<double(const std::string&)>& relevance_of,
                           const CompatSource& compat, std::size_t k) {
  std::vector<double> r;
  r.reserve(set.ids.size());
  for (const auto& id : set.ids) r.push_back(relevance_of(id));
  const auto& ids = set.ids;
  return MipInstance::make(
      ids, std::move(r), [&](std::size_t a, std::size_t b) { return compat.score(ids[a], ids[b]); },
      k);
}

void attach_connections(Draft& draft, const CompatibilityMatrix& matrix) {
  for (auto& link : draft.links) link.connection = matrix.get(link.a, link.b).connection;
}

}  // namespace arm
