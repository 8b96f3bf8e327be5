#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "moe/errors.hpp"
#include "moe/model.hpp"
#include "moe/presets.hpp"
#include "moe/rng.hpp"
#include "test_util.hpp"

using namespace moe;
using namespace moe::test;

namespace {

const double kSigmoid2 = 0.8807970779778823;  // 1 / (1 + e^-2)

MixingMeasure two_atom_gate(double b01, double b02, double s1, double s2) {
    MixingMeasure g;
    g.expert_spec = ExpertSpec::parse("linear", 1);
    g.atoms.push_back({b01, {s1}, {0.0, 0.0}});
    g.atoms.push_back({b02, {s2}, {0.0, 0.0}});
    return g;
}

}  // namespace

TEST_CASE("gate weights: symmetric and singleton cases") {
    const double x0 = 0.7;
    auto w = gate_weights(two_atom_gate(0.0, 0.0, 0.0, 0.0), std::span(&x0, 1));
    CHECK(w[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(w[1] == doctest::Approx(0.5).epsilon(1e-14));

    MixingMeasure single;
    single.expert_spec = ExpertSpec::parse("linear", 1);
    single.atoms.push_back({0.3, {2.0}, {1.0, 1.0}});
    const double x1 = -0.2;
    CHECK(gate_weights(single, std::span(&x1, 1))[0] == doctest::Approx(1.0));

    // both logits zero at x = 0
    const double zero = 0.0;
    auto w0 = gate_weights(two_atom_gate(0.0, 0.0, 1.0, 0.0), std::span(&zero, 1));
    CHECK(w0[0] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("gate weights form a probability vector and survive huge logits") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        auto g = random_measure(ExpertSpec::parse("ridge-sigmoid", 2), 4, rng);
        g.atoms[0].gate_bias = 700.0;  // overflow without max-subtraction
        auto x = random_input(2, rng);
        auto w = gate_weights(g, x);
        double sum = 0.0;
        for (double wi : w) {
            CHECK(wi >= 0.0);
            CHECK(wi <= 1.0);
            CHECK(std::isfinite(wi));
            sum += wi;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("gate weights are invariant under common translation") {
    Rng rng(12);
    for (int trial = 0; trial < 25; ++trial) {
        auto g = random_measure(ExpertSpec::parse("linear", 2), 3, rng);
        auto shifted = g;
        const double c0 = rng.uniform(-3.0, 3.0);
        const std::vector<double> v = random_input(2, rng, -2.0, 2.0);
        for (auto& a : shifted.atoms) {
            a.gate_bias += c0;
            for (int j = 0; j < 2; ++j) a.gate_slope[j] += v[j];
        }
        auto x = random_input(2, rng);
        auto w1 = gate_weights(g, x);
        auto w2 = gate_weights(shifted, x);
        for (std::size_t i = 0; i < w1.size(); ++i)
            CHECK(w1[i] == doctest::Approx(w2[i]).epsilon(1e-12));
    }
}

TEST_CASE("expert evaluation across families") {
    const double half = 0.5;
    auto lin = ExpertSpec::parse("linear", 1);
    CHECK(lin.eval(std::vector<double>{1.0, 2.0}, std::span(&half, 1)) == doctest::Approx(2.5));

    auto ridge = ExpertSpec::parse("ridge-sigmoid", 1);
    const double zero = 0.0;
    CHECK(ridge.eval(std::vector<double>{1.0, 0.0}, std::span(&zero, 1)) == doctest::Approx(0.5));

    auto poly2 = ExpertSpec::parse("poly2", 1);
    const double one = 1.0;
    CHECK(poly2.eval(std::vector<double>{2.0, 0.0}, std::span(&one, 1)) == doctest::Approx(4.0));

    // normalized input: x/||x|| is a unit vector, and 0 at the origin
    auto nridge = ExpertSpec::parse("nridge-sigmoid", 2);
    std::vector<double> far{3.0, 4.0};
    std::vector<double> eta{1.0, 0.5, 0.0};
    CHECK(nridge.eval(eta, far) ==
          doctest::Approx(sigmoid(1.0 * 0.6 + 0.5 * 0.8)).epsilon(1e-14));
    std::vector<double> origin{0.0, 0.0};
    CHECK(nridge.eval(eta, origin) == doctest::Approx(0.5));
}

TEST_CASE("activation derivative values") {
    ActivationFn sig{ActKind::Sigmoid};
    CHECK(sig.derivative(0, 0.0) == doctest::Approx(0.5));
    CHECK(sig.derivative(1, 0.0) == doctest::Approx(0.25));
    CHECK(sig.derivative(2, 0.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(sig.derivative(3, 0.0) == doctest::Approx(-0.125));
    CHECK(sig.derivative(0, 2.0) == doctest::Approx(kSigmoid2).epsilon(1e-15));

    ActivationFn th{ActKind::Tanh};
    CHECK(th.derivative(1, 0.0) == doctest::Approx(1.0));
    CHECK(th.derivative(2, 0.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(th.derivative(3, 0.0) == doctest::Approx(-2.0));

    ActivationFn ge{ActKind::Gelu};
    CHECK(ge.derivative(0, 0.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(ge.derivative(1, 0.0) == doctest::Approx(0.5));
    CHECK(ge.derivative(2, 0.0) == doctest::Approx(2.0 / std::sqrt(2.0 * std::acos(-1.0))));
    CHECK_THROWS_AS(ge.derivative(3, 0.0), CapabilityError);

    ActivationFn p3{ActKind::Poly, 3};
    CHECK(p3.derivative(0, 2.0) == doctest::Approx(8.0));
    CHECK(p3.derivative(1, 2.0) == doctest::Approx(12.0));
    CHECK(p3.derivative(2, 2.0) == doctest::Approx(12.0));
    CHECK(p3.derivative(3, 2.0) == doctest::Approx(6.0));
    CHECK(p3.derivative(4, 2.0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(sig.derivative(7, 0.0), CapabilityError);
}

TEST_CASE("activation derivatives agree with finite differences of the lower order") {
    for (ActivationFn act : {ActivationFn{ActKind::Sigmoid}, ActivationFn{ActKind::Tanh},
                             ActivationFn{ActKind::Poly, 3}}) {
        for (int order = 1; order <= 5; ++order) {
            for (double z : {-1.5, -0.3, 0.0, 0.7, 2.0}) {
                const double fd = test::central_diff(
                    [&](double v) { return act.derivative(order - 1, v); }, z);
                CHECK(rel_err(act.derivative(order, z), fd) < 1e-6);
            }
        }
    }
    ActivationFn ge{ActKind::Gelu};
    for (int order = 1; order <= 2; ++order)
        for (double z : {-1.0, 0.4, 1.3}) {
            const double fd =
                test::central_diff([&](double v) { return ge.derivative(order - 1, v); }, z);
            CHECK(rel_err(ge.derivative(order, z), fd) < 1e-6);
        }
}

TEST_CASE("regression function: single atom and benchmark values") {
    auto ridge = benchmark_truth(ExpertSpec::parse("ridge-sigmoid", 1));
    const double zero = 0.0;
    CHECK(regression_eval(ridge, std::span(&zero, 1)) ==
          doctest::Approx(kSigmoid2).epsilon(1e-12));

    auto lin = benchmark_truth(ExpertSpec::parse("linear", 1));
    CHECK(regression_eval(lin, std::span(&zero, 1)) == doctest::Approx(2.0).epsilon(1e-14));

    MixingMeasure single;
    single.expert_spec = ExpertSpec::parse("ridge-tanh", 1);
    single.atoms.push_back({1.7, {-0.4}, {0.8, 0.1}});
    Rng rng(3);
    for (int i = 0; i < 10; ++i) {
        auto x = random_input(1, rng);
        CHECK(regression_eval(single, x) ==
              doctest::Approx(single.expert_spec.eval(single.atoms[0].expert, x)));
    }
}

TEST_CASE("regression value stays within the expert range") {
    Rng rng(21);
    for (const auto& spec : all_families()) {
        auto g = random_measure(spec, 3, rng);
        for (int i = 0; i < 20; ++i) {
            auto x = random_input(1, rng);
            double lo = 1e300, hi = -1e300;
            for (const auto& a : g.atoms) {
                const double h = spec.eval(a.expert, x);
                lo = std::min(lo, h);
                hi = std::max(hi, h);
            }
            const double f = regression_eval(g, x);
            CHECK(f >= lo - 1e-12);
            CHECK(f <= hi + 1e-12);
        }
    }
}

TEST_CASE("analytic gradient matches central finite differences everywhere") {
    Rng rng(31);
    for (const auto& spec : all_families()) {
        for (int trial = 0; trial < 8; ++trial) {
            const int k = 1 + static_cast<int>(rng.below(3));
            auto g = random_measure(spec, k, rng);
            auto x = spec.family == ExpertFamily::NormalizedRidge
                         ? random_input(1, rng, 0.5, 1.5)
                         : random_input(1, rng);
            const auto grad = regression_grad(g, x);
            for (int i = 0; i < k; ++i) {
                auto check_coord = [&](double* slot, double analytic) {
                    const double backup = *slot;
                    const double fd = test::central_diff(
                        [&](double v) {
                            *slot = v;
                            const double f = regression_eval(g, x);
                            *slot = backup;
                            return f;
                        },
                        backup);
                    CHECK(rel_err(analytic, fd) < 1e-6);
                };
                check_coord(&g.atoms[i].gate_bias, grad[i].gate_bias);
                for (int j = 0; j < g.input_dim(); ++j)
                    check_coord(&g.atoms[i].gate_slope[j], grad[i].gate_slope[j]);
                for (int j = 0; j < g.param_dim(); ++j)
                    check_coord(&g.atoms[i].expert[j], grad[i].expert[j]);
            }
        }
    }
}

TEST_CASE("gradient vanishes where experts agree") {
    // single atom: w = 1 and h = f, so the gate gradient is zero
    MixingMeasure single;
    single.expert_spec = ExpertSpec::parse("ridge-sigmoid", 1);
    single.atoms.push_back({0.4, {1.2}, {-0.5, 0.3}});
    const double x = 0.3;
    auto grad = regression_grad(single, std::span(&x, 1));
    CHECK(grad[0].gate_bias == doctest::Approx(0.0).epsilon(1e-15));

    // symmetric pair with equal expert values at x = 0
    auto sym = benchmark_truth(ExpertSpec::parse("ridge-sigmoid", 1));
    const double zero = 0.0;
    auto gsym = regression_grad(sym, std::span(&zero, 1));
    CHECK(gsym[0].gate_bias == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(gsym[1].gate_bias == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("poly1 and linear are bit-compatible") {
    auto lin = ExpertSpec::parse("linear", 2);
    auto poly1 = ExpertSpec::parse("poly1", 2);
    Rng rng(41);
    std::vector<double> grad_a(3), grad_b(3);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> eta = random_input(3, rng, -3.0, 3.0);
        auto x = random_input(2, rng, -2.0, 2.0);
        CHECK(lin.eval(eta, x) == poly1.eval(eta, x));
        lin.grad(eta, x, grad_a);
        poly1.grad(eta, x, grad_b);
        for (int j = 0; j < 3; ++j) CHECK(grad_a[j] == grad_b[j]);
    }
}

TEST_CASE("dimension mismatches are rejected") {
    auto g = benchmark_truth(ExpertSpec::parse("ridge-sigmoid", 1));
    std::vector<double> bad{1.0, 2.0};
    CHECK_THROWS_AS(gate_weights(g, bad), InputError);
    CHECK_THROWS_AS(regression_eval(g, bad), InputError);
    g.atoms[0].gate_slope.push_back(1.0);
    CHECK_THROWS_AS(g.validate(), InputError);
}
