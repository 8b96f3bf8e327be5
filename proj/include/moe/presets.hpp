#pragma once

#include <vector>

#include "moe/model.hpp"

namespace moe {

/// Built-in two-component benchmark truth shared by all experiments:
///   atom 1: gate_bias 0, gate_slope 1, a -1, b 2
///   atom 2: gate_bias 0, gate_slope 0, a  1, b 2   (gate pinned at zero)
/// Scalar input, uniform on [0, 1], unit noise variance.
MixingMeasure benchmark_truth(const ExpertSpec& spec);

/// Variant whose first expert is input-independent (a_1 = 0) with intercept
/// b1; the setting where the gating/expert interaction appears.
MixingMeasure input_independent_truth(const ExpertSpec& spec, double b1);

/// 20 log-spaced sizes in [1e4, 1e5] with 20 replications.
std::vector<long> full_grid();
/// 10 log-spaced sizes in [1e3, 1e4]; paired with 10 replications.
std::vector<long> quick_grid();

}  // namespace moe
