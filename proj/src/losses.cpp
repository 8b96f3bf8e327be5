#include "moe/losses.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "moe/errors.hpp"
#include "moe/quadrature.hpp"
#include "moe/rng.hpp"

namespace moe {

namespace {

void check_compatible(const MixingMeasure& fitted, const MixingMeasure& truth) {
    fitted.validate();
    truth.validate();
    if (fitted.expert_spec != truth.expert_spec)
        throw InputError("fitted and true measures use different expert families");
}

double norm2sq(const double* a, const double* b, int n) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double diff = a[i] - b[i];
        acc += diff * diff;
    }
    return acc;
}

struct Gaps {
    double slope;  // ||beta1_i - beta1*_j||
    double a;      // ||a_i - a*_j||
    double b;      // |b_i - b*_j|
    double eta;    // ||eta_i - eta*_j||
};

Gaps atom_gaps(const Atom& fit, const Atom& tru, int d) {
    Gaps g;
    g.slope = std::sqrt(norm2sq(fit.gate_slope.data(), tru.gate_slope.data(), d));
    g.a = std::sqrt(norm2sq(fit.expert.data(), tru.expert.data(), d));
    g.b = std::abs(fit.expert[d] - tru.expert[d]);
    g.eta = std::sqrt(norm2sq(fit.expert.data(), tru.expert.data(), d + 1));
    return g;
}

template <class CellTerm>
LossBreakdown assemble(const MixingMeasure& fitted, const MixingMeasure& truth,
                       CellTerm cell_term) {
    const auto assign = voronoi_assign(fitted, truth);
    LossBreakdown out;
    out.per_cell_terms.assign(truth.size(), 0.0);
    for (int j = 0; j < truth.size(); ++j) {
        double weight_sum = 0.0;
        for (int i : assign.cells[j]) weight_sum += std::exp(fitted.atoms[i].gate_bias);
        out.weight_term += std::abs(weight_sum - std::exp(truth.atoms[j].gate_bias));
        out.per_cell_terms[j] = cell_term(assign.cells[j], j);
        out.total += out.per_cell_terms[j];
    }
    out.total += out.weight_term;
    return out;
}

}  // namespace

VoronoiAssignment voronoi_assign(const MixingMeasure& fitted, const MixingMeasure& truth) {
    check_compatible(fitted, truth);
    VoronoiAssignment out;
    out.cell_of.resize(fitted.size());
    out.cells.assign(truth.size(), {});
    for (int i = 0; i < fitted.size(); ++i) {
        const auto loc = fitted.location(i);
        int best = 0;
        double best_dist = std::numeric_limits<double>::infinity();
        for (int j = 0; j < truth.size(); ++j) {
            const auto tloc = truth.location(j);
            const double dist = norm2sq(loc.data(), tloc.data(), static_cast<int>(loc.size()));
            if (dist < best_dist) {  // strict: ties stay with the lowest index
                best_dist = dist;
                best = j;
            }
        }
        out.cell_of[i] = best;
        out.cells[best].push_back(i);
    }
    return out;
}

LossBreakdown loss_d1(const MixingMeasure& fitted, const MixingMeasure& truth) {
    const int d = fitted.input_dim();
    return assemble(fitted, truth, [&](const std::vector<int>& cell, int j) {
        double term = 0.0;
        for (int i : cell) {
            const auto g = atom_gaps(fitted.atoms[i], truth.atoms[j], d);
            const double w = std::exp(fitted.atoms[i].gate_bias);
            term += cell.size() > 1 ? w * (g.slope * g.slope + g.eta * g.eta)
                                    : w * (g.slope + g.eta);
        }
        return term;
    });
}

LossBreakdown loss_d2(const MixingMeasure& fitted, const MixingMeasure& truth) {
    const int d = fitted.input_dim();
    return assemble(fitted, truth, [&](const std::vector<int>& cell, int j) {
        double term = 0.0;
        for (int i : cell) {
            const auto g = atom_gaps(fitted.atoms[i], truth.atoms[j], d);
            const double w = std::exp(fitted.atoms[i].gate_bias);
            term += cell.size() > 1 ? w * (g.slope * g.slope + g.a * g.a + g.b * g.b)
                                    : w * (g.slope + g.a + g.b);
        }
        return term;
    });
}

LossBreakdown loss_d3(const MixingMeasure& fitted, const MixingMeasure& truth, double r) {
    if (!(r >= 1.0)) throw InputError("loss_d3 requires r >= 1, got " + std::to_string(r));
    const int d = fitted.input_dim();
    return assemble(fitted, truth, [&](const std::vector<int>& cell, int j) {
        double term = 0.0;
        for (int i : cell) {
            const auto g = atom_gaps(fitted.atoms[i], truth.atoms[j], d);
            const double w = std::exp(fitted.atoms[i].gate_bias);
            term += w * (std::pow(g.slope, r) + std::pow(g.a, r) + std::pow(g.b, r));
        }
        return term;
    });
}

L2Measure L2Measure::sample_set(std::vector<std::vector<double>> pts) {
    if (pts.empty()) throw InputError("sample-set measure needs at least one point");
    L2Measure mu;
    mu.kind = Kind::SampleSet;
    mu.dim = static_cast<int>(pts.front().size());
    mu.samples = std::move(pts);
    return mu;
}

double l2_distance(const MixingMeasure& g, const MixingMeasure& h, const L2Measure& mu) {
    g.validate();
    h.validate();
    if (g.input_dim() != mu.dim || h.input_dim() != mu.dim)
        throw InputError("measure dimension does not match the input distribution");

    EvalWorkspace ws;
    auto sq_diff = [&](std::span<const double> x) {
        const double diff = regression_eval(g, x, ws) - regression_eval(h, x, ws);
        return diff * diff;
    };

    double mean = 0.0;
    switch (mu.kind) {
        case L2Measure::Kind::SampleSet: {
            for (const auto& p : mu.samples) mean += sq_diff(p);
            mean /= static_cast<double>(mu.samples.size());
            break;
        }
        case L2Measure::Kind::UniformCube: {
            if (!(mu.hi > mu.lo)) throw InputError("uniform cube needs hi > lo");
            if (mu.dim == 1) {
                const auto& rule = gauss_legendre_01(mu.quadrature_nodes);
                for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                    const double x = mu.lo + (mu.hi - mu.lo) * rule.nodes[i];
                    mean += rule.weights[i] * sq_diff(std::span<const double>(&x, 1));
                }
            } else {
                Rng rng(mu.seed);
                std::vector<double> x(mu.dim);
                for (int i = 0; i < mu.mc_draws; ++i) {
                    for (auto& xi : x) xi = rng.uniform(mu.lo, mu.hi);
                    mean += sq_diff(x);
                }
                mean /= static_cast<double>(mu.mc_draws);
            }
            break;
        }
    }
    return std::sqrt(std::max(0.0, mean));
}

}  // namespace moe
