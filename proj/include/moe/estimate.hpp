#pragma once

#include <cstdint>
#include <vector>

#include "moe/dataset.hpp"
#include "moe/model.hpp"

namespace moe {

/// Removes the softmax translation degeneracy from a fitted measure.
///   PinLast: subtract the last atom's (gate_bias, gate_slope) from every atom.
///   PostHocTranslate: translate so the Voronoi cell of the last true atom
///   matches that pinned atom in aggregate, i.e. the cell's total weight
///   becomes one and its weight-averaged gate slope becomes zero (for a
///   singleton cell this pins that atom exactly; an empty cell falls back to
///   the atom nearest the last true atom). Pinning a single atom instead
///   would force an over-specified cell's total weight above one and leave a
///   loss floor that never shrinks.
/// Neither rule changes the regression function.
enum class GaugeRule { PinLast, PostHocTranslate };

/// The learning-rate schedule halves every lr_halving_updates SGD steps, so
/// the injected gradient noise and the work per fit do not scale with the
/// sample size. epochs <= 0 derives the epoch count from update_budget
/// (roughly update_budget steps in total, at least one epoch).
struct FitConfig {
    int k = 2;                      // fitted component budget
    double learning_rate = 0.05;
    int batch_size = 64;
    int epochs = 0;                 // <= 0: derive from update_budget
    long lr_halving_updates = 40000;
    long update_budget = 320000;
    double init_spread = 0.03;      // std of the Gaussian init perturbation
    std::uint64_t seed = 0;
    GaugeRule gauge = GaugeRule::PostHocTranslate;

    int resolve_epochs(long n) const;
};

struct FitResult {
    MixingMeasure measure;
    double final_objective = 0.0;
    /// Mean per-batch objective of each epoch (equals the full objective once
    /// the iterate stops moving); final_objective is the last entry.
    std::vector<double> objective_trace;
    long iterations = 0;  // total SGD steps taken
};

/// Mean squared prediction error (1/n) sum (y_i - f(x_i))^2.
double objective(const MixingMeasure& g, const Dataset& data);

/// Initialization near a reference measure: the k fitted indices are randomly
/// partitioned into one nonempty group per true atom, and every parameter is
/// the true value plus N(0, spread^2) noise. A group of m atoms starts with
/// gate biases at beta0* - log m, so the initial measure matches the
/// reference in aggregate weight as well. Deterministic in the seed.
MixingMeasure init_near_truth(const MixingMeasure& truth, int k, double spread,
                              std::uint64_t seed);

MixingMeasure gauge_fix(const MixingMeasure& g, const MixingMeasure& truth, GaugeRule rule);

/// Mini-batch SGD on the mean squared error with a seed-derived batch
/// permutation per epoch and the gauge rule applied after every epoch.
/// gauge_reference is required for GaugeRule::PostHocTranslate.
/// Throws DivergenceError if the objective becomes non-finite or exceeds
/// 1e6 times its initial value.
FitResult fit_sgd(const Dataset& data, const MixingMeasure& init, const FitConfig& cfg,
                  const MixingMeasure* gauge_reference = nullptr);

}  // namespace moe
