#pragma once

#include <string>
#include <vector>

namespace arm {

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool perfect_recall = false;
};

/// Retrieved ids are treated as a set. Throws EmptyGold.
Metrics compute_metrics(const std::vector<std::string>& retrieved,
                        const std::vector<std::string>& gold);

}  // namespace arm
