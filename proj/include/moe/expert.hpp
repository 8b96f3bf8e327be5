#pragma once

#include <span>
#include <string>

#include "moe/activation.hpp"

namespace moe {

enum class ExpertFamily { Linear, Polynomial, Ridge, NormalizedRidge };

/// An expert is link(a.u + b) with parameters eta = (a, b), where u is the
/// raw input x (Linear/Polynomial/Ridge) or x/||x|| (NormalizedRidge; u = 0
/// at x = 0) and link is the identity, z^p, or an activation.
struct ExpertSpec {
    ExpertFamily family = ExpertFamily::Linear;
    int degree = 1;            // Polynomial only, p >= 1
    ActivationFn activation;   // Ridge / NormalizedRidge only
    int input_dim = 1;

    int param_dim() const { return input_dim + 1; }
    bool uses_activation() const {
        return family == ExpertFamily::Ridge || family == ExpertFamily::NormalizedRidge;
    }

    double eval(std::span<const double> eta, std::span<const double> x) const;

    /// dh/deta into out (length param_dim()).
    void grad(std::span<const double> eta, std::span<const double> x,
              std::span<double> out) const;

    /// d2h/deta deta^T, row-major param_dim() x param_dim(), into out.
    void hessian(std::span<const double> eta, std::span<const double> x,
                 std::span<double> out) const;

    /// "linear", "poly3", "ridge-sigmoid", "nridge-sigmoid", ...
    std::string name() const;
    static ExpertSpec parse(const std::string& name, int input_dim);

    bool operator==(const ExpertSpec&) const = default;

    // feature map u and the scalar link; exposed for the identifiability checker
    void feature(std::span<const double> x, std::span<double> u) const;
    double link_derivative(int order, double z) const;
};

}  // namespace moe
