#include "moe/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "moe/errors.hpp"

namespace moe {

void MixingMeasure::validate() const {
    if (atoms.empty()) throw InputError("mixing measure must have at least one atom");
    const int d = input_dim();
    const int q = param_dim();
    for (const auto& a : atoms) {
        if (static_cast<int>(a.gate_slope.size()) != d)
            throw InputError("gate slope length does not match input dimension");
        if (static_cast<int>(a.expert.size()) != q)
            throw InputError("expert parameter length does not match family dimension");
        if (!std::isfinite(a.gate_bias)) throw InputError("gate bias must be finite");
    }
}

std::vector<double> MixingMeasure::location(int i) const {
    const auto& a = atoms.at(i);
    std::vector<double> loc;
    loc.reserve(a.gate_slope.size() + a.expert.size());
    loc.insert(loc.end(), a.gate_slope.begin(), a.gate_slope.end());
    loc.insert(loc.end(), a.expert.begin(), a.expert.end());
    return loc;
}

namespace {

void check_x(const MixingMeasure& g, std::span<const double> x) {
    if (static_cast<int>(x.size()) != g.input_dim())
        throw InputError("input has length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(g.input_dim()));
}

void gate_weights_into(const MixingMeasure& g, std::span<const double> x, EvalWorkspace& ws) {
    const int k = g.size();
    ws.logits.resize(k);
    ws.weights.resize(k);
    double top = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i) {
        const auto& a = g.atoms[i];
        double l = a.gate_bias;
        for (std::size_t j = 0; j < x.size(); ++j) l += a.gate_slope[j] * x[j];
        ws.logits[i] = l;
        top = std::max(top, l);
    }
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
        ws.weights[i] = std::exp(ws.logits[i] - top);
        sum += ws.weights[i];
    }
    const double inv = 1.0 / sum;
    for (int i = 0; i < k; ++i) ws.weights[i] *= inv;
}

}  // namespace

std::vector<double> gate_weights(const MixingMeasure& g, std::span<const double> x) {
    check_x(g, x);
    EvalWorkspace ws;
    gate_weights_into(g, x, ws);
    return ws.weights;
}

double regression_eval(const MixingMeasure& g, std::span<const double> x, EvalWorkspace& ws) {
    check_x(g, x);
    gate_weights_into(g, x, ws);
    const int k = g.size();
    ws.values.resize(k);
    double f = 0.0;
    for (int i = 0; i < k; ++i) {
        ws.values[i] = g.expert_spec.eval(g.atoms[i].expert, x);
        f += ws.weights[i] * ws.values[i];
    }
    return f;
}

double regression_eval(const MixingMeasure& g, std::span<const double> x) {
    EvalWorkspace ws;
    return regression_eval(g, x, ws);
}

double regression_value_and_grad(const MixingMeasure& g, std::span<const double> x,
                                 std::span<double> grad, EvalWorkspace& ws) {
    const double f = regression_eval(g, x, ws);
    const int k = g.size();
    const int d = g.input_dim();
    const int q = g.param_dim();
    const int stride = 1 + d + q;
    if (static_cast<int>(grad.size()) != k * stride)
        throw InputError("gradient buffer size mismatch");
    ws.expert_grad.resize(q);
    for (int i = 0; i < k; ++i) {
        double* gi = grad.data() + i * stride;
        const double w = ws.weights[i];
        const double pull = w * (ws.values[i] - f);
        gi[0] = pull;
        for (int j = 0; j < d; ++j) gi[1 + j] = pull * x[j];
        g.expert_spec.grad(g.atoms[i].expert, x, ws.expert_grad);
        for (int j = 0; j < q; ++j) gi[1 + d + j] = w * ws.expert_grad[j];
    }
    return f;
}

std::vector<AtomGradient> regression_grad(const MixingMeasure& g, std::span<const double> x) {
    const int k = g.size();
    const int d = g.input_dim();
    const int q = g.param_dim();
    EvalWorkspace ws;
    std::vector<double> flat(static_cast<std::size_t>(k) * (1 + d + q));
    regression_value_and_grad(g, x, flat, ws);
    std::vector<AtomGradient> out(k);
    for (int i = 0; i < k; ++i) {
        const double* gi = flat.data() + static_cast<std::size_t>(i) * (1 + d + q);
        out[i].gate_bias = gi[0];
        out[i].gate_slope.assign(gi + 1, gi + 1 + d);
        out[i].expert.assign(gi + 1 + d, gi + 1 + d + q);
    }
    return out;
}

}  // namespace moe
