#pragma once

#include <string>
#include <vector>

#include "flowline/atlas.hpp"

namespace flowline {

struct FragmentationResult {
  bool ok = false;
  std::string detail;
  /// Ordered factors with compose(factors, right to left) == g, each supported
  /// in a single chart of the cover (the enlarged interval).
  std::vector<Atlas> factors;
  std::vector<int> factor_chart;  // canonical chart index per factor
};

/// Factors g over the quarter-interval chart cover: transversal clopen splits,
/// a bounded-displacement chain when the leafwise displacement exceeds the
/// cover margin, side correctors on the overlap strips, and slab splitting.
/// Every factor is sigma-hat equivariant and the product is verified exactly.
FragmentationResult fragment_element(const Atlas& g, const ChartDecomposition& cover);

}  // namespace flowline
