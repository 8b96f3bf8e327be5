#pragma once

#include <vector>

namespace moe {

struct QuadratureRule {
    std::vector<double> nodes;    // in [0, 1]
    std::vector<double> weights;  // summing to 1
};

/// Gauss-Legendre rule with n nodes mapped to [0, 1]. Rules are cached and
/// shared read-only across threads.
const QuadratureRule& gauss_legendre_01(int n);

}  // namespace moe
