#include "moe/activation.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "moe/errors.hpp"

namespace moe {

namespace {

constexpr int kMaxSmoothOrder = 6;

// Coefficient tables for d^t/dz^t sigma as a polynomial in s = sigma(z).
// Built once from d/dz s^m = m (s^m - s^{m+1}).
const std::vector<std::vector<double>>& sigmoid_tables() {
    static const std::vector<std::vector<double>> tables = [] {
        std::vector<std::vector<double>> t;
        t.push_back({0.0, 1.0});  // order 0: s
        for (int order = 1; order <= kMaxSmoothOrder; ++order) {
            const auto& prev = t.back();
            std::vector<double> next(prev.size() + 1, 0.0);
            for (std::size_t m = 1; m < prev.size(); ++m) {
                next[m] += prev[m] * static_cast<double>(m);
                next[m + 1] -= prev[m] * static_cast<double>(m);
            }
            t.push_back(std::move(next));
        }
        return t;
    }();
    return tables;
}

// Same idea for tanh: d/dz t^m = m (t^{m-1} - t^{m+1}).
const std::vector<std::vector<double>>& tanh_tables() {
    static const std::vector<std::vector<double>> tables = [] {
        std::vector<std::vector<double>> t;
        t.push_back({0.0, 1.0});  // order 0: t
        for (int order = 1; order <= kMaxSmoothOrder; ++order) {
            const auto& prev = t.back();
            std::vector<double> next(prev.size() + 1, 0.0);
            for (std::size_t m = 1; m < prev.size(); ++m) {
                if (m >= 1) next[m - 1] += prev[m] * static_cast<double>(m);
                next[m + 1] -= prev[m] * static_cast<double>(m);
            }
            t.push_back(std::move(next));
        }
        return t;
    }();
    return tables;
}

double eval_poly(const std::vector<double>& coeffs, double v) {
    double acc = 0.0;
    for (std::size_t m = coeffs.size(); m > 0; --m) acc = acc * v + coeffs[m - 1];
    return acc;
}

double gauss_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double gauss_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double int_pow(double z, int p) {
    double acc = 1.0;
    for (int i = 0; i < p; ++i) acc *= z;
    return acc;
}

}  // namespace

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

int ActivationFn::max_derivative_order() const {
    return kind == ActKind::Gelu ? 2 : kMaxSmoothOrder;
}

double ActivationFn::derivative(int order, double z) const {
    if (order < 0 || order > max_derivative_order())
        throw CapabilityError("activation '" + name() + "' supports derivative orders 0.." +
                              std::to_string(max_derivative_order()) + ", got " +
                              std::to_string(order));
    switch (kind) {
        case ActKind::Sigmoid:
            return eval_poly(sigmoid_tables()[order], sigmoid(z));
        case ActKind::Tanh:
            return eval_poly(tanh_tables()[order], std::tanh(z));
        case ActKind::Gelu: {
            if (order == 0) return z * gauss_cdf(z);
            if (order == 1) return gauss_cdf(z) + z * gauss_pdf(z);
            return (2.0 - z * z) * gauss_pdf(z);
        }
        case ActKind::Poly: {
            if (order > poly_degree) return 0.0;
            double coeff = 1.0;
            for (int i = 0; i < order; ++i) coeff *= static_cast<double>(poly_degree - i);
            return coeff * int_pow(z, poly_degree - order);
        }
    }
    throw InputError("unknown activation kind");
}

std::string ActivationFn::name() const {
    switch (kind) {
        case ActKind::Sigmoid: return "sigmoid";
        case ActKind::Tanh: return "tanh";
        case ActKind::Gelu: return "gelu";
        case ActKind::Poly: return "poly" + std::to_string(poly_degree);
    }
    return "?";
}

}  // namespace moe
