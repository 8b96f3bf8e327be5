#include "moe/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "moe/errors.hpp"
#include "moe/losses.hpp"
#include "moe/rng.hpp"

namespace moe {

double objective(const MixingMeasure& g, const Dataset& data) {
    g.validate();
    if (data.size() == 0) throw InputError("objective needs a nonempty dataset");
    if (data.dim != g.input_dim()) throw InputError("dataset dimension mismatch");
    EvalWorkspace ws;
    double acc = 0.0;
    for (long i = 0; i < data.size(); ++i) {
        const double r = data.ys[i] - regression_eval(g, data.x(i), ws);
        acc += r * r;
    }
    return acc / static_cast<double>(data.size());
}

MixingMeasure init_near_truth(const MixingMeasure& truth, int k, double spread,
                              std::uint64_t seed) {
    truth.validate();
    const int k_true = truth.size();
    if (k < k_true)
        throw InputError("init budget k = " + std::to_string(k) +
                         " is below the reference atom count " + std::to_string(k_true));
    Rng rng(seed);

    // random partition of [k] into k_true nonempty groups: a shuffled list
    // seeds one index per group, the rest land uniformly
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::vector<int> group_of(k);
    for (int j = 0; j < k_true; ++j) group_of[order[j]] = j;
    for (int i = k_true; i < k; ++i)
        group_of[order[i]] = static_cast<int>(rng.below(static_cast<std::uint64_t>(k_true)));

    std::vector<int> group_sizes(k_true, 0);
    for (int i = 0; i < k; ++i) ++group_sizes[group_of[i]];

    MixingMeasure init;
    init.expert_spec = truth.expert_spec;
    init.atoms.resize(k);
    for (int i = 0; i < k; ++i) {
        const Atom& center = truth.atoms[group_of[i]];
        Atom a;
        // share the cell's weight among its atoms so the initial measure
        // aggregates to the reference one
        a.gate_bias = center.gate_bias - std::log(group_sizes[group_of[i]]) +
                      spread * rng.normal();
        a.gate_slope.resize(center.gate_slope.size());
        for (std::size_t j = 0; j < a.gate_slope.size(); ++j)
            a.gate_slope[j] = center.gate_slope[j] + spread * rng.normal();
        a.expert.resize(center.expert.size());
        for (std::size_t j = 0; j < a.expert.size(); ++j)
            a.expert[j] = center.expert[j] + spread * rng.normal();
        init.atoms[i] = std::move(a);
    }
    return init;
}

MixingMeasure gauge_fix(const MixingMeasure& g, const MixingMeasure& truth, GaugeRule rule) {
    g.validate();
    double bias0 = g.atoms.back().gate_bias;
    std::vector<double> slope0 = g.atoms.back().gate_slope;
    if (rule == GaugeRule::PostHocTranslate) {
        const auto assign = voronoi_assign(g, truth);
        const auto& last_cell = assign.cells.back();
        if (!last_cell.empty()) {
            // match the pinned truth in aggregate: the cell's total weight
            // becomes one and its weight-averaged gate slope becomes zero
            double total = 0.0;
            slope0.assign(g.input_dim(), 0.0);
            for (int i : last_cell) {
                const double w = std::exp(g.atoms[i].gate_bias);
                total += w;
                for (int j = 0; j < g.input_dim(); ++j)
                    slope0[j] += w * g.atoms[i].gate_slope[j];
            }
            bias0 = std::log(total);
            for (double& v : slope0) v /= total;
        } else {
            const auto target = truth.location(truth.size() - 1);
            int pivot = g.size() - 1;
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i < g.size(); ++i) {
                const auto loc = g.location(i);
                double dist = 0.0;
                for (std::size_t j = 0; j < loc.size(); ++j) {
                    const double diff = loc[j] - target[j];
                    dist += diff * diff;
                }
                if (dist < best) {
                    best = dist;
                    pivot = i;
                }
            }
            bias0 = g.atoms[pivot].gate_bias;
            slope0 = g.atoms[pivot].gate_slope;
        }
    }
    MixingMeasure out = g;
    for (auto& a : out.atoms) {
        a.gate_bias -= bias0;
        for (std::size_t j = 0; j < a.gate_slope.size(); ++j) a.gate_slope[j] -= slope0[j];
    }
    return out;
}

int FitConfig::resolve_epochs(long n) const {
    if (epochs > 0) return epochs;
    const long updates_per_epoch = (n + batch_size - 1) / batch_size;
    const long wanted = (update_budget + updates_per_epoch - 1) / updates_per_epoch;
    return static_cast<int>(std::max<long>(1, wanted));
}

FitResult fit_sgd(const Dataset& data, const MixingMeasure& init, const FitConfig& cfg,
                  const MixingMeasure* gauge_reference) {
    init.validate();
    const long n = data.size();
    if (n == 0) throw InputError("fit_sgd needs a nonempty dataset");
    if (data.dim != init.input_dim()) throw InputError("dataset dimension mismatch");
    if (cfg.batch_size < 1 || cfg.batch_size > n)
        throw InputError("batch_size must be in [1, n]");
    if (cfg.lr_halving_updates < 1) throw InputError("lr_halving_updates must be >= 1");
    if (cfg.epochs <= 0 && cfg.update_budget < 1)
        throw InputError("update_budget must be >= 1 when epochs are derived");
    if (cfg.gauge == GaugeRule::PostHocTranslate && gauge_reference == nullptr)
        throw InputError("PostHocTranslate gauge needs a reference measure");
    const int epochs = cfg.resolve_epochs(n);

    const int k = init.size();
    const int d = init.input_dim();
    const int q = init.param_dim();
    const int stride = 1 + d + q;

    MixingMeasure current = init;
    EvalWorkspace ws;
    std::vector<double> point_grad(static_cast<std::size_t>(k) * stride);
    std::vector<double> batch_grad(point_grad.size());
    std::vector<long> order(n);
    std::iota(order.begin(), order.end(), 0);

    const double initial_objective = objective(current, data);
    const double divergence_cap = 1e6 * initial_objective;

    FitResult result;
    result.objective_trace.reserve(epochs);
    Rng shuffler(derive_seed(cfg.seed, 0x5d0f, 0, stage_tag("batch-order")));

    for (int epoch = 0; epoch < epochs; ++epoch) {
        shuffler.shuffle(order);

        double epoch_obj = 0.0;
        long batches = 0;
        for (long start = 0; start < n; start += cfg.batch_size) {
            const long stop = std::min<long>(start + cfg.batch_size, n);
            const double inv_b = 1.0 / static_cast<double>(stop - start);
            std::fill(batch_grad.begin(), batch_grad.end(), 0.0);
            double batch_obj = 0.0;
            for (long idx = start; idx < stop; ++idx) {
                const long row = order[idx];
                const double f =
                    regression_value_and_grad(current, data.x(row), point_grad, ws);
                const double residual = f - data.ys[row];
                batch_obj += residual * residual;
                const double c = 2.0 * residual * inv_b;
                for (std::size_t j = 0; j < batch_grad.size(); ++j)
                    batch_grad[j] += c * point_grad[j];
            }
            epoch_obj += batch_obj * inv_b;
            ++batches;
            const double step =
                cfg.learning_rate *
                std::pow(0.5, static_cast<double>(result.iterations / cfg.lr_halving_updates));
            ++result.iterations;

            for (int i = 0; i < k; ++i) {
                Atom& a = current.atoms[i];
                const double* gi = batch_grad.data() + static_cast<std::size_t>(i) * stride;
                a.gate_bias -= step * gi[0];
                for (int j = 0; j < d; ++j) a.gate_slope[j] -= step * gi[1 + j];
                for (int j = 0; j < q; ++j) a.expert[j] -= step * gi[1 + d + j];
            }
        }

        current = gauge_fix(current, gauge_reference ? *gauge_reference : current, cfg.gauge);

        const double epoch_mean = epoch_obj / static_cast<double>(batches);
        result.objective_trace.push_back(epoch_mean);
        const bool blew_up = !std::isfinite(epoch_mean) ||
                             (divergence_cap > 0.0 && epoch_mean > divergence_cap) ||
                             (divergence_cap == 0.0 && epoch_mean > 1e-6);
        if (blew_up)
            throw DivergenceError("objective diverged at epoch " + std::to_string(epoch) +
                                      " (value " + std::to_string(epoch_mean) + ")",
                                  epoch);
    }

    result.final_objective = result.objective_trace.back();
    result.measure = std::move(current);
    return result;
}

}  // namespace moe
