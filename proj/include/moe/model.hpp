#pragma once

#include <span>
#include <vector>

#include "moe/expert.hpp"

namespace moe {

/// One mixture component: softmax-gate parameters plus expert parameters.
/// The component's mixing weight is exp(gate_bias).
struct Atom {
    double gate_bias = 0.0;              // beta0
    std::vector<double> gate_slope;      // beta1, length d
    std::vector<double> expert;          // eta, length q = d + 1
};

/// An ordered list of atoms sharing one expert family. The regression
/// function is f(x) = sum_i softmax_i(gate_slope.x + gate_bias) * h(x, eta_i).
struct MixingMeasure {
    ExpertSpec expert_spec;
    std::vector<Atom> atoms;

    int input_dim() const { return expert_spec.input_dim; }
    int param_dim() const { return expert_spec.param_dim(); }
    int size() const { return static_cast<int>(atoms.size()); }

    /// Throws InputError if atom dimensions are inconsistent or a gate bias
    /// is not finite.
    void validate() const;

    /// Concatenated (gate_slope, expert) location of atom i, the coordinates
    /// used for nearest-atom matching.
    std::vector<double> location(int i) const;
};

/// Softmax gate weights at x: positive, summing to one. Max-subtraction is
/// applied before exponentiation.
std::vector<double> gate_weights(const MixingMeasure& g, std::span<const double> x);

double regression_eval(const MixingMeasure& g, std::span<const double> x);

struct AtomGradient {
    double gate_bias = 0.0;
    std::vector<double> gate_slope;
    std::vector<double> expert;
};

/// Analytic df/dtheta for every atom:
///   df/dbeta0_i = w_i (h_i - f),  df/dbeta1_i = x w_i (h_i - f),
///   df/deta_i   = w_i dh/deta(x, eta_i).
std::vector<AtomGradient> regression_grad(const MixingMeasure& g, std::span<const double> x);

/// Scratch buffers for the hot path; one per thread.
struct EvalWorkspace {
    std::vector<double> logits, weights, values, expert_grad;
};

/// f(x); on return ws holds the gate weights and expert values.
double regression_eval(const MixingMeasure& g, std::span<const double> x, EvalWorkspace& ws);

/// f(x) and the gradient, flattened per atom as [gate_bias, gate_slope, expert].
/// grad must have size k * (1 + d + q). Minimal allocation; used by the SGD loop.
double regression_value_and_grad(const MixingMeasure& g, std::span<const double> x,
                                 std::span<double> grad, EvalWorkspace& ws);

}  // namespace moe
