#include "moe/expert.hpp"

#include <cmath>

#include "moe/errors.hpp"

namespace moe {

namespace {

void check_dims(const ExpertSpec& s, std::span<const double> eta, std::span<const double> x) {
    if (static_cast<int>(x.size()) != s.input_dim)
        throw InputError("expert input has length " + std::to_string(x.size()) +
                         ", expected " + std::to_string(s.input_dim));
    if (static_cast<int>(eta.size()) != s.param_dim())
        throw InputError("expert parameters have length " + std::to_string(eta.size()) +
                         ", expected " + std::to_string(s.param_dim()));
}

double int_pow(double z, int p) {
    double acc = 1.0;
    for (int i = 0; i < p; ++i) acc *= z;
    return acc;
}

}  // namespace

void ExpertSpec::feature(std::span<const double> x, std::span<double> u) const {
    if (family != ExpertFamily::NormalizedRidge) {
        for (std::size_t i = 0; i < x.size(); ++i) u[i] = x[i];
        return;
    }
    double norm2 = 0.0;
    for (double v : x) norm2 += v * v;
    if (norm2 == 0.0) {
        for (std::size_t i = 0; i < x.size(); ++i) u[i] = 0.0;  // x/||x|| := 0 at the origin
        return;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t i = 0; i < x.size(); ++i) u[i] = x[i] * inv;
}

double ExpertSpec::link_derivative(int order, double z) const {
    switch (family) {
        case ExpertFamily::Linear:
            if (order == 0) return z;
            return order == 1 ? 1.0 : 0.0;
        case ExpertFamily::Polynomial: {
            if (order > degree) return 0.0;
            double coeff = 1.0;
            for (int i = 0; i < order; ++i) coeff *= static_cast<double>(degree - i);
            return coeff * int_pow(z, degree - order);
        }
        case ExpertFamily::Ridge:
        case ExpertFamily::NormalizedRidge:
            return activation.derivative(order, z);
    }
    throw InputError("unknown expert family");
}

double ExpertSpec::eval(std::span<const double> eta, std::span<const double> x) const {
    check_dims(*this, eta, x);
    double z = eta[input_dim];  // b
    if (family == ExpertFamily::NormalizedRidge) {
        double norm2 = 0.0;
        for (double v : x) norm2 += v * v;
        if (norm2 > 0.0) {
            const double inv = 1.0 / std::sqrt(norm2);
            for (int i = 0; i < input_dim; ++i) z += eta[i] * x[i] * inv;
        }
    } else {
        for (int i = 0; i < input_dim; ++i) z += eta[i] * x[i];
    }
    return link_derivative(0, z);
}

void ExpertSpec::grad(std::span<const double> eta, std::span<const double> x,
                      std::span<double> out) const {
    check_dims(*this, eta, x);
    const int q = param_dim();
    if (static_cast<int>(out.size()) != q) throw InputError("gradient buffer size mismatch");
    const bool normalized = family == ExpertFamily::NormalizedRidge;
    double scale = 1.0;
    if (normalized) {
        double norm2 = 0.0;
        for (double v : x) norm2 += v * v;
        scale = norm2 > 0.0 ? 1.0 / std::sqrt(norm2) : 0.0;
    }
    double z = eta[input_dim];
    for (int i = 0; i < input_dim; ++i) z += eta[i] * x[i] * scale;
    const double slope = link_derivative(1, z);
    for (int i = 0; i < input_dim; ++i) out[i] = slope * x[i] * scale;
    out[input_dim] = slope;
}

void ExpertSpec::hessian(std::span<const double> eta, std::span<const double> x,
                         std::span<double> out) const {
    check_dims(*this, eta, x);
    const int q = param_dim();
    if (static_cast<int>(out.size()) != q * q) throw InputError("hessian buffer size mismatch");
    const bool normalized = family == ExpertFamily::NormalizedRidge;
    double scale = 1.0;
    if (normalized) {
        double norm2 = 0.0;
        for (double v : x) norm2 += v * v;
        scale = norm2 > 0.0 ? 1.0 / std::sqrt(norm2) : 0.0;
    }
    double z = eta[input_dim];
    for (int i = 0; i < input_dim; ++i) z += eta[i] * x[i] * scale;
    const double curv = link_derivative(2, z);
    // hessian = link''(z) * (u,1)(u,1)^T
    for (int i = 0; i < q; ++i) {
        const double ui = i < input_dim ? x[i] * scale : 1.0;
        for (int j = 0; j < q; ++j) {
            const double uj = j < input_dim ? x[j] * scale : 1.0;
            out[i * q + j] = curv * ui * uj;
        }
    }
}

std::string ExpertSpec::name() const {
    switch (family) {
        case ExpertFamily::Linear: return "linear";
        case ExpertFamily::Polynomial: return "poly" + std::to_string(degree);
        case ExpertFamily::Ridge: return "ridge-" + activation.name();
        case ExpertFamily::NormalizedRidge: return "nridge-" + activation.name();
    }
    return "?";
}

ExpertSpec ExpertSpec::parse(const std::string& name, int input_dim) {
    ExpertSpec spec;
    spec.input_dim = input_dim;
    auto parse_activation = [](const std::string& a) -> ActivationFn {
        if (a == "sigmoid") return {ActKind::Sigmoid};
        if (a == "tanh") return {ActKind::Tanh};
        if (a == "gelu") return {ActKind::Gelu};
        if (a.rfind("poly", 0) == 0) {
            const int p = std::stoi(a.substr(4));
            if (p < 1) throw InputError("polynomial activation degree must be >= 1");
            return {ActKind::Poly, p};
        }
        throw InputError("unknown activation '" + a + "'");
    };
    if (name == "linear") {
        spec.family = ExpertFamily::Linear;
    } else if (name.rfind("poly", 0) == 0) {
        spec.family = ExpertFamily::Polynomial;
        spec.degree = std::stoi(name.substr(4));
        if (spec.degree < 1) throw InputError("polynomial expert degree must be >= 1");
    } else if (name.rfind("ridge-", 0) == 0) {
        spec.family = ExpertFamily::Ridge;
        spec.activation = parse_activation(name.substr(6));
    } else if (name.rfind("nridge-", 0) == 0) {
        spec.family = ExpertFamily::NormalizedRidge;
        spec.activation = parse_activation(name.substr(7));
    } else {
        throw InputError("unknown expert family '" + name + "'");
    }
    return spec;
}

}  // namespace moe
