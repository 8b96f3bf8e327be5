#include "moe/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "moe/errors.hpp"
#include "moe/rng.hpp"

namespace moe {

Dataset generate_dataset(const MixingMeasure& truth, long n, double noise_var,
                         const InputDist& input, std::uint64_t seed) {
    truth.validate();
    if (n < 1) throw InputError("dataset needs n >= 1");
    if (input.dim != truth.input_dim()) throw InputError("input distribution dimension mismatch");
    if (noise_var < 0.0) throw InputError("noise variance must be nonnegative");

    Dataset data;
    data.dim = input.dim;
    data.noise_var = noise_var;
    data.seed = seed;
    data.xs.resize(static_cast<std::size_t>(n) * input.dim);
    data.ys.resize(n);

    Rng rng(seed);
    for (auto& x : data.xs) x = rng.uniform(input.lo, input.hi);
    EvalWorkspace ws;
    const double noise_sd = std::sqrt(noise_var);
    for (long i = 0; i < n; ++i) {
        const double f = regression_eval(truth, data.x(i), ws);
        data.ys[i] = noise_var > 0.0 ? f + noise_sd * rng.normal() : f;
    }
    return data;
}

SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 2) throw InputError("slope fit needs at least two points");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [n, value] : points) {
        if (!(n > 0.0)) throw InputError("slope fit needs positive sample sizes");
        if (!(value > 0.0)) throw InputError("slope fit needs positive values");
        const double lx = std::log(n), ly = std::log(value);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        syy += ly * ly;
    }
    const double m = static_cast<double>(points.size());
    const double det = m * sxx - sx * sx;
    if (det <= 0.0) throw InputError("slope fit needs at least two distinct sample sizes");
    SlopeFit fit;
    fit.slope = (m * sxy - sx * sy) / det;
    fit.intercept = (sy - fit.slope * sx) / m;
    const double ss_tot = syy - sy * sy / m;
    double ss_res = 0.0;
    for (const auto& [n, value] : points) {
        const double pred = fit.intercept + fit.slope * std::log(n);
        const double res = std::log(value) - pred;
        ss_res += res * res;
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (const char* env = std::getenv("MOE_LAB_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) hw = std::min(hw, cap);
    }
    return hw;
}

std::vector<long> log_spaced_grid(long lo, long hi, int count) {
    if (count < 1 || lo < 1 || hi < lo) throw InputError("bad grid request");
    std::vector<long> grid;
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        long n = std::lround(std::pow(10.0, std::log10(static_cast<double>(lo)) +
                                                t * (std::log10(static_cast<double>(hi)) -
                                                     std::log10(static_cast<double>(lo)))));
        if (!grid.empty() && n <= grid.back()) n = grid.back() + 1;  // keep strictly increasing
        grid.push_back(n);
    }
    return grid;
}

namespace {

ReplicationResult run_replication(const SweepConfig& cfg, long n, int rep) {
    ReplicationResult out;
    out.seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(n),
                           static_cast<std::uint64_t>(rep), stage_tag("replication"));
    try {
        const Dataset data = generate_dataset(
            cfg.truth, n, cfg.noise_var, cfg.input,
            derive_seed(out.seed, 0, 0, stage_tag("data")));
        const MixingMeasure start =
            init_near_truth(cfg.truth, cfg.fitted_components(), cfg.fit.init_spread,
                            derive_seed(out.seed, 0, 0, stage_tag("init")));
        FitConfig fit = cfg.fit;
        fit.k = cfg.fitted_components();
        fit.seed = derive_seed(out.seed, 0, 0, stage_tag("sgd"));
        const FitResult result = fit_sgd(data, start, fit, &cfg.truth);
        const MixingMeasure fitted = gauge_fix(result.measure, cfg.truth, fit.gauge);
        if (cfg.metric == SweepMetric::L2) {
            L2Measure mu = L2Measure::uniform01(cfg.input.dim);
            mu.lo = cfg.input.lo;
            mu.hi = cfg.input.hi;
            out.loss = l2_distance(fitted, cfg.truth, mu);
        } else {
            switch (cfg.loss) {
                case LossKind::D1: out.loss = loss_d1(fitted, cfg.truth).total; break;
                case LossKind::D2: out.loss = loss_d2(fitted, cfg.truth).total; break;
                case LossKind::D3: out.loss = loss_d3(fitted, cfg.truth, cfg.d3_r).total; break;
            }
        }
        if (!std::isfinite(out.loss)) {
            out.diverged = true;
            out.error = "non-finite loss";
        }
    } catch (const DivergenceError& e) {
        out.diverged = true;
        out.error = e.what();
    }
    return out;
}

}  // namespace

SweepReport run_sweep(const SweepConfig& cfg) {
    cfg.truth.validate();
    if (cfg.n_grid.empty()) throw InputError("sweep needs a nonempty sample-size grid");
    for (std::size_t i = 1; i < cfg.n_grid.size(); ++i)
        if (cfg.n_grid[i] <= cfg.n_grid[i - 1])
            throw InputError("sample-size grid must be strictly increasing");
    if (cfg.replications < 1) throw InputError("sweep needs at least one replication");

    const auto t0 = std::chrono::steady_clock::now();
    const int sizes = static_cast<int>(cfg.n_grid.size());
    const int total_tasks = sizes * cfg.replications;
    std::vector<ReplicationResult> results(total_tasks);

    const int workers = std::min(resolve_threads(cfg.threads), total_tasks);
    std::atomic<int> next_task{0};
    auto worker_fn = [&] {
        for (;;) {
            const int task = next_task.fetch_add(1);
            if (task >= total_tasks) return;
            const int size_idx = task / cfg.replications;
            const int rep = task % cfg.replications;
            results[task] = run_replication(cfg, cfg.n_grid[size_idx], rep);
        }
    };
    if (workers <= 1) {
        worker_fn();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker_fn);
        for (auto& t : pool) t.join();
    }

    SweepReport report;
    report.config = cfg;
    int total_divergent = 0;
    for (int s = 0; s < sizes; ++s) {
        SampleSizeStats stats;
        stats.n = cfg.n_grid[s];
        stats.replications.assign(results.begin() + static_cast<long>(s) * cfg.replications,
                                  results.begin() + static_cast<long>(s + 1) * cfg.replications);
        double sum = 0.0;
        int good = 0;
        for (const auto& r : stats.replications) {
            if (r.diverged) {
                ++stats.divergent;
                continue;
            }
            sum += r.loss;
            ++good;
        }
        total_divergent += stats.divergent;
        if (good > 0) {
            stats.mean = sum / good;
            double ss = 0.0;
            for (const auto& r : stats.replications)
                if (!r.diverged) ss += (r.loss - stats.mean) * (r.loss - stats.mean);
            stats.stddev = good > 1 ? std::sqrt(ss / (good - 1)) : 0.0;
        }
        report.stats.push_back(std::move(stats));
    }
    if (5 * total_divergent > total_tasks)
        throw DivergenceError("more than 20% of replications diverged (" +
                                  std::to_string(total_divergent) + "/" +
                                  std::to_string(total_tasks) + ")",
                              -1);

    // slope on per-size means; omitted (flagged) when the grid is degenerate
    std::vector<std::pair<double, double>> mean_points;
    for (const auto& s : report.stats)
        if (s.divergent < cfg.replications && s.mean > 0.0)
            mean_points.emplace_back(static_cast<double>(s.n), s.mean);
    if (mean_points.size() >= 2) report.slope = fit_loglog_slope(mean_points);

    for (int rep = 0; rep < cfg.replications; ++rep) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& s : report.stats) {
            const auto& r = s.replications[rep];
            if (!r.diverged && r.loss > 0.0) pts.emplace_back(static_cast<double>(s.n), r.loss);
        }
        if (pts.size() >= 2)
            report.per_replication_slopes.push_back(fit_loglog_slope(pts));
        else
            report.per_replication_slopes.push_back(std::nullopt);
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

SweepReport l2_rate_sweep(SweepConfig cfg) {
    cfg.metric = SweepMetric::L2;
    return run_sweep(cfg);
}

}  // namespace moe
