#pragma once

#include <cstddef>
#include <vector>

namespace ntsopt {

struct GaussLegendreRule {
  std::vector<double> nodes;    // on (-1, 1), ascending
  std::vector<double> weights;  // positive, sum to 2
};

// Nodes/weights for the n-point rule on (-1, 1). Computed once per n by
// Newton iteration on the Legendre polynomial and cached (thread-safe).
const GaussLegendreRule& gauss_legendre(int n);

}  // namespace ntsopt
