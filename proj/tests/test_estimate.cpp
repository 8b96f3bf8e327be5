#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "moe/errors.hpp"
#include "moe/estimate.hpp"
#include "moe/harness.hpp"
#include "moe/losses.hpp"
#include "moe/presets.hpp"
#include "moe/rng.hpp"
#include "test_util.hpp"

using namespace moe;
using namespace moe::test;

namespace {

Dataset tiny_dataset(const MixingMeasure& truth, long n, double noise, std::uint64_t seed) {
    return generate_dataset(truth, n, noise, InputDist{1, 0.0, 1.0}, seed);
}

bool same_measure(const MixingMeasure& a, const MixingMeasure& b) {
    if (a.size() != b.size()) return false;
    for (int i = 0; i < a.size(); ++i) {
        if (a.atoms[i].gate_bias != b.atoms[i].gate_bias) return false;
        if (a.atoms[i].gate_slope != b.atoms[i].gate_slope) return false;
        if (a.atoms[i].expert != b.atoms[i].expert) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("objective: exact-fit and constant cases") {
    auto truth = benchmark_truth(ExpertSpec::parse("ridge-sigmoid", 1));
    auto data = tiny_dataset(truth, 200, 0.0, 1);
    CHECK(objective(truth, data) <= 1e-20);

    // constant responses matched by a constant predictor
    MixingMeasure flat;
    flat.expert_spec = ExpertSpec::parse("linear", 1);
    flat.atoms.push_back({0.0, {0.0}, {0.0, 3.25}});
    Dataset const_data = data;
    for (auto& y : const_data.ys) y = 3.25;
    CHECK(objective(flat, const_data) <= 1e-25);

    // y = 0 against f = 1
    flat.atoms[0].expert[1] = 1.0;
    for (auto& y : const_data.ys) y = 0.0;
    CHECK(objective(flat, const_data) == doctest::Approx(1.0).epsilon(1e-14));

    Dataset empty;
    CHECK_THROWS_AS(objective(truth, empty), InputError);
}

TEST_CASE("init_near_truth: partition shape, determinism, spread zero") {
    auto truth = benchmark_truth(ExpertSpec::parse("ridge-sigmoid", 1));

    auto exact = init_near_truth(truth, 2, 0.0, 99);
    CHECK(loss_d1(exact, truth).total == doctest::Approx(0.0).epsilon(1e-15));

    // k = 3 over k* = 2: exactly one doubled cell, every cell nonempty
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto init = init_near_truth(truth, 3, 0.05, seed);
        auto cells = voronoi_assign(init, truth).cells;
        CHECK(cells[0].size() + cells[1].size() == 3);
        CHECK(cells[0].size() >= 1);
        CHECK(cells[1].size() >= 1);
    }

    auto a = init_near_truth(truth, 3, 0.1, 7);
    auto b = init_near_truth(truth, 3, 0.1, 7);
    CHECK(same_measure(a, b));
    bool any_differ = false;
    for (std::uint64_t seed = 8; seed < 13; ++seed)
        if (!same_measure(init_near_truth(truth, 3, 0.1, seed), a)) any_differ = true;
    CHECK(any_differ);

    CHECK_THROWS_AS(init_near_truth(truth, 1, 0.1, 1), InputError);
}

TEST_CASE("gauge_fix leaves the regression function unchanged") {
    Rng rng(55);
    auto truth = benchmark_truth(ExpertSpec::parse("ridge-sigmoid", 1));
    for (GaugeRule rule : {GaugeRule::PinLast, GaugeRule::PostHocTranslate}) {
        for (int trial = 0; trial < 5; ++trial) {
            auto g = random_measure(truth.expert_spec, 3, rng);
            auto fixed = gauge_fix(g, truth, rule);
            for (int i = 0; i < 100; ++i) {
                auto x = random_input(1, rng, 0.0, 1.0);
                CHECK(regression_eval(g, x) ==
                      doctest::Approx(regression_eval(fixed, x)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("gauge_fix pins and is idempotent on gauged measures") {
    auto truth = benchmark_truth(ExpertSpec::parse("ridge-sigmoid", 1));

    // benchmark truth already has its last atom at (0, 0): unchanged
    for (GaugeRule rule : {GaugeRule::PinLast, GaugeRule::PostHocTranslate}) {
        auto fixed = gauge_fix(truth, truth, rule);
        CHECK(same_measure(fixed, truth));
    }

    // idempotent once the cell assignment is settled (near-truth measures)
    auto g = init_near_truth(truth, 3, 0.15, 56);
    auto once = gauge_fix(g, truth, GaugeRule::PostHocTranslate);
    auto twice = gauge_fix(once, truth, GaugeRule::PostHocTranslate);
    for (int i = 0; i < once.size(); ++i) {
        CHECK(twice.atoms[i].gate_bias ==
              doctest::Approx(once.atoms[i].gate_bias).epsilon(1e-12));
        CHECK(twice.atoms[i].gate_slope[0] ==
              doctest::Approx(once.atoms[i].gate_slope[0]).epsilon(1e-12));
    }

    // the last true cell's aggregate is pinned: total weight one,
    // weight-averaged gate slope zero
    auto cells = voronoi_assign(once, truth).cells;
    double total = 0.0, mean_slope = 0.0;
    for (int i : cells.back()) {
        total += std::exp(once.atoms[i].gate_bias);
        mean_slope += std::exp(once.atoms[i].gate_bias) * once.atoms[i].gate_slope[0];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mean_slope == doctest::Approx(0.0).epsilon(1e-12));

    auto pinned = gauge_fix(g, truth, GaugeRule::PinLast);
    CHECK(pinned.atoms.back().gate_bias == 0.0);
    CHECK(pinned.atoms.back().gate_slope[0] == 0.0);
}

TEST_CASE("fit_sgd: stationary at the truth on noiseless data") {
    auto truth = benchmark_truth(ExpertSpec::parse("ridge-sigmoid", 1));
    auto data = tiny_dataset(truth, 512, 0.0, 2);
    FitConfig cfg;
    cfg.k = 2;
    cfg.epochs = 5;
    cfg.batch_size = 128;
    auto result = fit_sgd(data, truth, cfg, &truth);
    for (double v : result.objective_trace) CHECK(v == 0.0);
    CHECK(same_measure(result.measure, truth));
}

TEST_CASE("fit_sgd: zero learning rate returns the gauge-fixed init") {
    auto truth = benchmark_truth(ExpertSpec::parse("ridge-sigmoid", 1));
    auto data = tiny_dataset(truth, 300, 1.0, 3);
    auto init = init_near_truth(truth, 2, 0.1, 4);
    FitConfig cfg;
    cfg.k = 2;
    cfg.epochs = 3;
    cfg.batch_size = 100;
    cfg.learning_rate = 0.0;
    auto result = fit_sgd(data, init, cfg, &truth);
    CHECK(same_measure(result.measure, gauge_fix(init, truth, cfg.gauge)));
}

TEST_CASE("fit_sgd is bitwise reproducible") {
    auto truth = benchmark_truth(ExpertSpec::parse("linear", 1));
    auto data = tiny_dataset(truth, 600, 1.0, 5);
    auto init = init_near_truth(truth, 3, 0.1, 6);
    FitConfig cfg;
    cfg.k = 3;
    cfg.epochs = 12;
    cfg.batch_size = 64;
    cfg.seed = 11;
    auto r1 = fit_sgd(data, init, cfg, &truth);
    auto r2 = fit_sgd(data, init, cfg, &truth);
    CHECK(same_measure(r1.measure, r2.measure));
    CHECK(r1.objective_trace == r2.objective_trace);
    CHECK(r1.final_objective == r2.final_objective);
    CHECK(r1.objective_trace.size() == 12);
    CHECK(r1.final_objective == r1.objective_trace.back());
}

TEST_CASE("fit_sgd improves the objective on the benchmark configurations") {
    for (const char* fam : {"ridge-sigmoid", "linear"}) {
        auto truth = benchmark_truth(ExpertSpec::parse(fam, 1));
        for (int k : {2, 3}) {
            auto data = tiny_dataset(truth, 2000, 1.0, 17);
            auto init = init_near_truth(truth, k, 0.2, 18);
            FitConfig cfg;
            cfg.k = k;
            cfg.epochs = 40;
            cfg.lr_halving_updates = 300;
            auto result = fit_sgd(data, init, cfg, &truth);
            CHECK(objective(result.measure, data) <= objective(init, data));
        }
    }
}

TEST_CASE("fit_sgd divergence guard names the epoch") {
    auto truth = benchmark_truth(ExpertSpec::parse("linear", 1));
    auto data = tiny_dataset(truth, 400, 1.0, 19);
    auto init = init_near_truth(truth, 2, 0.3, 20);
    FitConfig cfg;
    cfg.k = 2;
    cfg.epochs = 30;
    cfg.learning_rate = 1e5;
    bool threw = false;
    try {
        fit_sgd(data, init, cfg, &truth);
    } catch (const DivergenceError& e) {
        threw = true;
        CHECK(e.epoch >= 0);
        CHECK(e.epoch < 30);
    }
    CHECK(threw);
}

TEST_CASE("fit_sgd rejects bad configurations") {
    auto truth = benchmark_truth(ExpertSpec::parse("linear", 1));
    auto data = tiny_dataset(truth, 50, 1.0, 21);
    FitConfig cfg;
    cfg.k = 2;
    cfg.batch_size = 51;  // larger than n
    CHECK_THROWS_AS(fit_sgd(data, truth, cfg, &truth), InputError);
    cfg.batch_size = 16;
    CHECK_THROWS_AS(fit_sgd(data, truth, cfg, nullptr), InputError);  // gauge needs the truth
    cfg.gauge = GaugeRule::PinLast;
    CHECK_NOTHROW(fit_sgd(data, truth, cfg, nullptr));
}

TEST_CASE("regression pin: benchmark sigmoid fit lands near the truth") {
    auto truth = benchmark_truth(ExpertSpec::parse("ridge-sigmoid", 1));
    auto data = tiny_dataset(truth, 10000, 1.0, derive_seed(2024, 10000, 0, stage_tag("pin")));
    auto init = init_near_truth(truth, 2, FitConfig{}.init_spread,
                                derive_seed(2024, 10000, 1, stage_tag("pin")));
    FitConfig cfg;  // library defaults
    cfg.k = 2;
    cfg.seed = 33;
    auto result = fit_sgd(data, init, cfg, &truth);
    auto fitted = gauge_fix(result.measure, truth, cfg.gauge);
    // the statistical floor of this configuration sits near 0.4-0.6 at
    // n = 1e4 under unit noise; pin the deterministic value with headroom
    CHECK(loss_d2(fitted, truth).total < 1.2);
}
