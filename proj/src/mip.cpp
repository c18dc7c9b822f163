#include "arm/mip.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "arm/error.hpp"

namespace arm {

MipInstance MipInstance::make(std::vector<std::string> ids, std::vector<double> relevance,
                              const std::function<double(std::size_t, std::size_t)>& score,
                              std::size_t k) {
  if (ids.size() != relevance.size()) throw ValidationError("ids and relevance differ in length");
  const std::size_t m = ids.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return ids[x] < ids[y]; });

  MipInstance inst;
  inst.k = k;
  inst.compat.assign(m * m, 0.0);
  for (auto i : order) {
    inst.ids.push_back(ids[i]);
    inst.relevance.push_back(relevance[i]);
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      auto a = order[i], b = order[j];
      const double c = ids[a] < ids[b] ? score(a, b) : score(b, a);
      inst.compat[i * m + j] = inst.compat[j * m + i] = c;
    }
  }
  inst.validate();
  return inst;
}

void MipInstance::validate() const {
  const std::size_t m = ids.size();
  if (k == 0) throw Infeasible("k must be at least 1");
  if (k > m) {
    throw Infeasible("k = " + std::to_string(k) + " exceeds " + std::to_string(m) + " candidates");
  }
  if (relevance.size() != m || compat.size() != m * m) {
    throw ValidationError("instance arrays do not match the candidate count");
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (i > 0 && !(ids[i - 1] < ids[i])) throw ValidationError("ids must be unique and sorted");
    if (!(relevance[i] >= 0.0 && relevance[i] <= 1.0)) {
      throw ValidationError("relevance of '" + ids[i] + "' outside [0, 1]");
    }
    if (C(i, i) != 0.0) throw ValidationError("nonzero diagonal compatibility");
    for (std::size_t j = i + 1; j < m; ++j) {
      if (C(i, j) != C(j, i)) throw ValidationError("compatibility is not symmetric");
      if (!(C(i, j) >= 0.0 && C(i, j) <= 1.0)) throw ValidationError("compatibility outside [0, 1]");
    }
  }
}

double selection_objective(const MipInstance& inst, std::span<const std::size_t> selection,
                           std::vector<std::pair<std::size_t, std::size_t>>* links) {
  std::vector<std::size_t> sel(selection.begin(), selection.end());
  std::sort(sel.begin(), sel.end());
  double value = 0.0;
  for (auto i : sel) value += inst.relevance[i];

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t x = 0; x < sel.size(); ++x) {
    for (std::size_t y = x + 1; y < sel.size(); ++y) {
      if (inst.C(sel[x], sel[y]) > 0.0) pairs.emplace_back(sel[x], sel[y]);
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [&](const auto& p, const auto& q) {
    return inst.C(p.first, p.second) > inst.C(q.first, q.second);
  });
  const std::size_t budget = sel.empty() ? 0 : 2 * (sel.size() - 1);
  if (pairs.size() > budget) pairs.resize(budget);
  for (const auto& [i, j] : pairs) value += inst.C(i, j);
  if (links) *links = std::move(pairs);
  return value;
}

namespace {

Draft make_draft(const MipInstance& inst, const std::vector<std::size_t>& sel) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  Draft d;
  d.objective = selection_objective(inst, sel, &pairs);
  for (auto i : sel) d.objects.push_back(inst.ids[i]);
  for (const auto& [i, j] : pairs) d.links.push_back({inst.ids[i], inst.ids[j], inst.C(i, j), {}});
  return d;
}

class BranchAndBound {
 public:
  explicit BranchAndBound(const MipInstance& inst) : inst_(inst) {
    const std::size_t m = inst.size();
    potential_.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<double> row;
      for (std::size_t j = 0; j < m; ++j) {
        if (j != i) row.push_back(inst.C(i, j));
      }
      const std::size_t take = std::min(inst.k - 1, row.size());
      std::partial_sort(row.begin(), row.begin() + take, row.end(), std::greater<>());
      potential_[i] = inst.relevance[i] + 0.5 * std::accumulate(row.begin(), row.begin() + take, 0.0);
    }
    order_.resize(m);
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(),
                     [&](auto a, auto b) { return potential_[a] > potential_[b]; });
  }

  std::vector<std::size_t> run() {
    visit(0, 0.0);
    return best_sel_;
  }

 private:
  // Any selection's value is bounded by the sum of its members' potentials,
  // since each link counts half toward both endpoints.
  void visit(std::size_t depth, double sel_potential) {
    const std::size_t need = inst_.k - sel_.size();
    if (need == 0) {
      auto sorted = sel_;
      std::sort(sorted.begin(), sorted.end());
      const double v = selection_objective(inst_, sorted);
      if (!found_ || v > best_ || (v == best_ && sorted < best_sel_)) {
        found_ = true;
        best_ = v;
        best_sel_ = std::move(sorted);
      }
      return;
    }
    if (order_.size() - depth < need) return;
    if (found_) {
      double bound = sel_potential;
      for (std::size_t t = 0; t < need; ++t) bound += potential_[order_[depth + t]];
      if (bound + 1e-9 * std::max(1.0, std::abs(best_)) < best_) return;
    }
    const std::size_t i = order_[depth];
    sel_.push_back(i);
    visit(depth + 1, sel_potential + potential_[i]);
    sel_.pop_back();
    visit(depth + 1, sel_potential);
  }

  const MipInstance& inst_;
  std::vector<double> potential_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> sel_;
  std::vector<std::size_t> best_sel_;
  double best_ = 0.0;
  bool found_ = false;
};

}  // namespace

Draft solve_mip(const MipInstance& inst) {
  inst.validate();
  return make_draft(inst, BranchAndBound(inst).run());
}

Draft brute_force_mip(const MipInstance& inst) {
  inst.validate();
  const std::size_t m = inst.size(), k = inst.k;
  if (m > 15) throw TooLarge("brute force is limited to 15 candidates");
  std::vector<std::size_t> comb(k);
  std::iota(comb.begin(), comb.end(), 0);
  std::vector<std::size_t> best_sel;
  double best = 0.0;
  while (true) {
    const double v = selection_objective(inst, comb);
    if (best_sel.empty() || v > best) {
      best = v;
      best_sel = comb;
    }
    std::size_t pos = k;
    while (pos > 0 && comb[pos - 1] == m - k + pos - 1) --pos;
    if (pos == 0) break;
    ++comb[pos - 1];
    for (std::size_t t = pos; t < k; ++t) comb[t] = comb[t - 1] + 1;
  }
  return make_draft(inst, best_sel);
}

AuditReport audit_draft(const MipInstance& inst, const Draft& draft) {
  AuditReport report;
  auto fail = [&](std::string msg) { report.violations.push_back(std::move(msg)); };
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < inst.ids.size(); ++i) index[inst.ids[i]] = i;

  std::set<std::string> selected;
  double expected = 0.0;
  for (const auto& id : draft.objects) {
    auto it = index.find(id);
    if (it == index.end()) {
      fail("selected object '" + id + "' is not a candidate");
      continue;
    }
    if (!selected.insert(id).second) fail("object '" + id + "' selected twice");
    expected += inst.relevance[it->second];
  }
  if (draft.objects.size() != inst.k) {
    fail("selected " + std::to_string(draft.objects.size()) + " objects, expected " +
         std::to_string(inst.k));
  }
  const std::size_t budget = inst.k == 0 ? 0 : 2 * (inst.k - 1);
  if (draft.links.size() > budget) {
    fail(std::to_string(draft.links.size()) + " links exceed the budget of " +
         std::to_string(budget));
  }
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& link : draft.links) {
    if (link.a == link.b) fail("self link on '" + link.a + "'");
    if (!selected.count(link.a) || !selected.count(link.b)) {
      fail("link " + link.a + "-" + link.b + " touches an unselected object");
      continue;
    }
    auto key = std::minmax(link.a, link.b);
    if (!seen.insert({key.first, key.second}).second) {
      fail("link " + link.a + "-" + link.b + " repeated");
    }
    const double c = inst.C(index[link.a], index[link.b]);
    if (std::abs(c - link.score) > 1e-12) fail("link " + link.a + "-" + link.b + " score mismatch");
    expected += c;
    if (link.connection) {
      const auto& conn = *link.connection;
      auto ends = std::minmax(conn.a.object_id, conn.b.object_id);
      if (ends.first != key.first || ends.second != key.second) {
        fail("connection endpoints differ from link " + link.a + "-" + link.b);
      }
    }
  }
  if (std::abs(expected - draft.objective) > 1e-9 * std::max(1.0, std::abs(expected))) {
    fail("objective does not match the selected objects and links");
  }
  return report;
}

}  // namespace arm
