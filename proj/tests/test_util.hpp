#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "moe/model.hpp"
#include "moe/rng.hpp"

namespace moe::test {

// central finite difference of a scalar function of one coordinate
inline double central_diff(const std::function<double(double)>& f, double x0,
                           double step = 1e-5) {
    return (f(x0 + step) - f(x0 - step)) / (2.0 * step);
}

// relative error with a floor so near-zero coordinates stay meaningful
inline double rel_err(double a, double b, double floor = 1e-3) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// every family at input dimension d, exercising all activations
inline std::vector<ExpertSpec> all_families(int d = 1) {
    std::vector<ExpertSpec> out;
    out.push_back(ExpertSpec::parse("linear", d));
    out.push_back(ExpertSpec::parse("poly2", d));
    out.push_back(ExpertSpec::parse("poly3", d));
    out.push_back(ExpertSpec::parse("ridge-sigmoid", d));
    out.push_back(ExpertSpec::parse("ridge-tanh", d));
    out.push_back(ExpertSpec::parse("ridge-gelu", d));
    out.push_back(ExpertSpec::parse("nridge-sigmoid", d));
    return out;
}

inline MixingMeasure random_measure(const ExpertSpec& spec, int k, Rng& rng) {
    MixingMeasure g;
    g.expert_spec = spec;
    for (int i = 0; i < k; ++i) {
        Atom a;
        a.gate_bias = rng.uniform(-1.0, 1.0);
        a.gate_slope.resize(spec.input_dim);
        for (auto& v : a.gate_slope) v = rng.uniform(-2.0, 2.0);
        a.expert.resize(spec.param_dim());
        for (auto& v : a.expert) v = rng.uniform(-2.0, 2.0);
        g.atoms.push_back(std::move(a));
    }
    return g;
}

inline std::vector<double> random_input(int d, Rng& rng, double lo = -1.0, double hi = 1.0) {
    std::vector<double> x(d);
    for (auto& v : x) v = rng.uniform(lo, hi);
    return x;
}

}  // namespace moe::test
