#include "arm/metrics.hpp"

#include <set>

#include "arm/error.hpp"

namespace arm {

Metrics compute_metrics(const std::vector<std::string>& retrieved,
                        const std::vector<std::string>& gold) {
  const std::set<std::string> g(gold.begin(), gold.end());
  if (g.empty()) throw EmptyGold("gold set is empty");
  const std::set<std::string> r(retrieved.begin(), retrieved.end());
  std::size_t hits = 0;
  for (const auto& id : r) hits += g.count(id);
  Metrics m;
  m.precision = r.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(r.size());
  m.recall = static_cast<double>(hits) / static_cast<double>(g.size());
  const double s = m.precision + m.recall;
  m.f1 = s == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / s;
  m.perfect_recall = hits == g.size();
  return m;
}

}  // namespace arm
