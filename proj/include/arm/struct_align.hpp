#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "arm/compatibility.hpp"
#include "arm/embedding.hpp"
#include "arm/mip.hpp"

namespace arm {

/// Each round, every current member contributes its `per_step` most
/// compatible outside objects; repeated for `steps` rounds.
struct ExpansionStrategy {
  std::size_t per_step = 1;
  std::size_t steps = 1;
  bool operator==(const ExpansionStrategy&) const = default;
};

std::vector<ExpansionStrategy> default_strategies();

struct SearchSet {
  ExpansionStrategy strategy;
  std::vector<std::string> ids;  // sorted
};

/// One search set per strategy. Candidates with zero compatibility are never
/// added; ties are broken by id.
std::vector<SearchSet> expand_base(const std::vector<std::string>& base, const CompatSource& compat,
                                   const std::vector<ExpansionStrategy>& strategies);

/// Max chunk cosine against the question, clamped to [0, 1].
double relevance(const VectorStore& store, std::span<const double> question_vec,
                 const DataObject& object);

MipInstance build_instance(const SearchSet& set,
                           const std::function<double(const std::string&)>& relevance_of,
                           const CompatSource& compat, std::size_t k);

/// Fills in the best-matching parts behind each selected link.
void attach_connections(Draft& draft, const CompatibilityMatrix& matrix);

}  // namespace arm
