#pragma once

#include <cstdint>
#include <vector>

#include "moe/model.hpp"

namespace moe {

/// Nearest-true-atom matching in the concatenated (gate_slope, expert)
/// coordinates. Ties go to the lowest true index; cells may be empty.
struct VoronoiAssignment {
    std::vector<int> cell_of;             // fitted index -> true index
    std::vector<std::vector<int>> cells;  // true index -> fitted indices
};

VoronoiAssignment voronoi_assign(const MixingMeasure& fitted, const MixingMeasure& truth);

struct LossBreakdown {
    double weight_term = 0.0;
    std::vector<double> per_cell_terms;  // one per true atom
    double total = 0.0;
};

/// Matched-component loss for generic expert parameters: aggregated-weight
/// discrepancy, plus squared parameter gaps on multi-atom cells and
/// first-power gaps on singleton cells.
LossBreakdown loss_d1(const MixingMeasure& fitted, const MixingMeasure& truth);

/// Same shape as loss_d1 but with eta split into (a, b), so singleton cells
/// contribute |gap_slope| + |gap_a| + |gap_b| instead of the joint norms.
LossBreakdown loss_d2(const MixingMeasure& fitted, const MixingMeasure& truth);

/// r-th power loss: every cell, regardless of cardinality, contributes
/// weight * (|gap_slope|^r + |gap_a|^r + |gap_b|^r). Requires r >= 1.
LossBreakdown loss_d3(const MixingMeasure& fitted, const MixingMeasure& truth, double r);

/// Input distribution for the L2 distance between regression functions.
struct L2Measure {
    enum class Kind { UniformCube, SampleSet };
    Kind kind = Kind::UniformCube;
    int dim = 1;
    double lo = 0.0, hi = 1.0;
    int quadrature_nodes = 256;    // used when dim == 1
    int mc_draws = 65536;          // used when dim > 1
    std::uint64_t seed = 0x5eedULL;
    std::vector<std::vector<double>> samples;  // Kind::SampleSet

    static L2Measure uniform01(int dim = 1) { return L2Measure{Kind::UniformCube, dim}; }
    static L2Measure sample_set(std::vector<std::vector<double>> pts);
};

/// sqrt( integral (f_G - f_H)^2 dmu ). Gauss-Legendre for dim == 1,
/// fixed-seed Monte Carlo for dim > 1, sample mean for explicit sets.
double l2_distance(const MixingMeasure& g, const MixingMeasure& h, const L2Measure& mu);

}  // namespace moe
