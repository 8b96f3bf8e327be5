#pragma once

#include <functional>
#include <vector>

#include "moe/losses.hpp"
#include "moe/model.hpp"

namespace moe {

/// Witness sequence diagnostics: for each n, the r-th power Voronoi loss of
/// the constructed measure against the truth, the L2 distance between the two
/// regression functions, and their ratio.
struct RatioCurve {
    std::vector<long> n_grid;
    std::vector<double> losses;     // D3,r values
    std::vector<double> distances;  // L2 values
    std::vector<double> ratios;     // distances / losses
};

/// Splits the first true atom of a linear-expert measure into two atoms with
/// weights exp(b0*)/2 + 1/(2 n^{r+1}) each and intercepts shifted by +-1/n;
/// remaining atoms copy the truth. The split leaves the regression function
/// equal to that of the truth with its first weight raised by n^{-(r+1)}.
MixingMeasure construct_gn_polynomial(const MixingMeasure& truth, long n, double r);

struct RidgeConstruction {
    MixingMeasure measure;
    double root = 0.0;      // the chosen nonzero root c
    double residual = 0.0;  // |q(c)| relative to the largest coefficient scale
    int taylor_order = 0;   // R
};

/// Regime-2 witness for ridge experts (requires a*_1 = 0): splits atom 1 into
/// half-weight copies with intercepts b* + c/n and b* + 2c/n, where c != 0 is
/// a numerically found root of
///   q(c) = sum_{alpha=1..R} (1 + 2^alpha) sigma^(alpha)(b*) / (alpha! n^alpha) c^alpha,
/// R = r for odd r, else r + 1 (smallest odd integer >= r for fractional r).
/// Throws ConstructionError when q(c)/c has no real root with |c| <= 1e3.
RidgeConstruction construct_gn_ridge(const MixingMeasure& truth, long n, double r);

using WitnessConstructor = std::function<MixingMeasure(const MixingMeasure&, long, double)>;

/// Builds the witness at every n in the grid and records loss, distance and
/// ratio. Grid entries are computed independently.
RatioCurve ratio_curve(const MixingMeasure& truth, double r, const std::vector<long>& n_grid,
                       const L2Measure& mu, const WitnessConstructor& constructor);

}  // namespace moe
