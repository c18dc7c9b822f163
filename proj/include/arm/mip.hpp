#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "arm/compatibility.hpp"

namespace arm {

/// Selection problem over M candidates: pick exactly k objects and at most
/// 2(k-1) links among them, maximizing summed relevance plus link scores.
/// Candidates are kept sorted by id so index order is id order.
struct MipInstance {
  std::vector<std::string> ids;
  std::vector<double> relevance;  // R_i in [0, 1]
  std::vector<double> compat;     // row-major M x M, symmetric, zero diagonal, values in [0, 1]
  std::size_t k = 1;

  std::size_t size() const { return ids.size(); }
  double C(std::size_t i, std::size_t j) const { return compat[i * ids.size() + j]; }

  /// Sorts candidates by id. `score(a, b)` is only called for a < b.
  static MipInstance make(std::vector<std::string> ids, std::vector<double> relevance,
                          const std::function<double(std::size_t, std::size_t)>& score,
                          std::size_t k);

  /// Throws Infeasible when k is 0 or exceeds M, ValidationError otherwise.
  void validate() const;
};

struct DraftLink {
  std::string a;  // a < b
  std::string b;
  double score = 0.0;
  std::optional<Connection> connection;
};

struct Draft {
  std::vector<std::string> objects;  // sorted by id
  std::vector<DraftLink> links;      // score desc, then (a, b)
  double objective = 0.0;
};

/// Value of a fixed selection under the optimal link completion: relevance
/// summed in index order, plus the 2(k-1) largest positive link scores among
/// selected pairs added in descending order. `links` receives the chosen pairs.
double selection_objective(const MipInstance& inst, std::span<const std::size_t> selection,
                           std::vector<std::pair<std::size_t, std::size_t>>* links = nullptr);

/// Exact branch and bound. Among optima, the lexicographically smallest id set wins.
Draft solve_mip(const MipInstance& inst);

/// Exhaustive enumeration of k-subsets; M <= 15, otherwise TooLarge.
Draft brute_force_mip(const MipInstance& inst);

struct AuditReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Re-checks a draft against the instance from scratch: binary selection with
/// exactly k distinct objects, at most 2(k-1) links, links only between
/// selected objects, link scores and objective consistent with the instance.
AuditReport audit_draft(const MipInstance& inst, const Draft& draft);

}  // namespace arm
