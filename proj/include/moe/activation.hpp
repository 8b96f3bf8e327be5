#pragma once

#include <string>

namespace moe {

enum class ActKind { Sigmoid, Tanh, Gelu, Poly };

/// Scalar activation with exact derivatives.
///
/// Sigmoid and tanh derivatives are evaluated through their polynomial
/// recurrences (sigma' = sigma(1-sigma), tanh' = 1-tanh^2), supported up to
/// order 6. Gelu uses the exact Gaussian-CDF form and supports orders 0..2.
/// Poly is z^p with derivatives to order 6.
struct ActivationFn {
    ActKind kind = ActKind::Sigmoid;
    int poly_degree = 1;  // Poly only, p >= 1

    int max_derivative_order() const;
    double value(double z) const { return derivative(0, z); }

    /// order-th derivative at z; order 0 is the function itself.
    /// Throws CapabilityError for unsupported orders.
    double derivative(int order, double z) const;

    std::string name() const;

    bool operator==(const ActivationFn&) const = default;
};

double sigmoid(double z);

}  // namespace moe
