#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "moe/errors.hpp"
#include "moe/identify.hpp"
#include "moe/presets.hpp"
#include "test_util.hpp"

using namespace moe;

namespace {

FamilyConfig canonical(const char* family, FamilyMode mode, int k, std::uint64_t seed) {
    FamilyConfig cfg;
    cfg.spec = ExpertSpec::parse(family, 1);
    cfg.mode = mode;
    cfg.domain = default_domain(cfg.spec, mode);
    ParamSampler sampler;
    sampler.count = k;
    cfg.sampler = sampler;
    cfg.seed = seed;
    return cfg;
}

int find_column(const FamilyMatrix& m, int atom, std::vector<int> x_power,
                std::vector<int> eta_order) {
    for (int c = 0; c < m.cols; ++c) {
        const auto& l = m.labels[c];
        if (l.atom == atom && l.x_power == x_power && l.eta_order == eta_order) return c;
    }
    return -1;
}

}  // namespace

TEST_CASE("family matrix shapes and determinism") {
    auto id1 = build_family(canonical("ridge-sigmoid", FamilyMode::Identifiability, 1, 3));
    CHECK(id1.cols == 10);  // (nu, tau) with |nu|+|tau| <= 2 over N x N^2
    CHECK(id1.rows == 512);

    auto ind2 = build_family(canonical("ridge-sigmoid", FamilyMode::Independence, 2, 3));
    CHECK(ind2.cols == 18);  // 2 atoms x 3 monomials x 3 derivative orders
    CHECK(ind2.rows == 512);

    auto again = build_family(canonical("ridge-sigmoid", FamilyMode::Independence, 2, 3));
    CHECK(ind2.values == again.values);

    auto other_seed = build_family(canonical("ridge-sigmoid", FamilyMode::Independence, 2, 4));
    CHECK(ind2.values != other_seed.values);
}

TEST_CASE("coincident parameters are rejected") {
    FamilyConfig cfg;
    cfg.spec = ExpertSpec::parse("ridge-sigmoid", 1);
    cfg.mode = FamilyMode::Independence;
    cfg.domain = default_domain(cfg.spec, cfg.mode);
    cfg.params = {{1.0, 0.5}, {1.0, 0.5 + 1e-9}};
    CHECK_THROWS_AS(build_family(cfg), InputError);
}

TEST_CASE("ridge experts are not identifiability-independent: the gating pair") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto m = build_family(canonical("ridge-sigmoid", FamilyMode::Identifiability, 1, seed));
        auto v = verdict(m);
        CHECK_FALSE(v.independent);
        CHECK(v.min_singular_ratio <= 1e-12);
        REQUIRE(v.dependency.has_value());
        const auto& dep = *v.dependency;
        const int col_da = find_column(m, 0, {0}, {1, 0});   // dh/da
        const int col_xdb = find_column(m, 0, {1}, {0, 1});  // x * dh/db
        REQUIRE(col_da >= 0);
        REQUIRE(col_xdb >= 0);
        const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
        CHECK(std::abs(std::abs(dep[col_da]) - inv_sqrt2) < 1e-3);
        CHECK(std::abs(std::abs(dep[col_xdb]) - inv_sqrt2) < 1e-3);
        CHECK(dep[col_da] * dep[col_xdb] < 0.0);  // opposite signs
        for (int c = 0; c < m.cols; ++c)
            if (c != col_da && c != col_xdb) CHECK(std::abs(dep[c]) < 1e-3);
    }
}

TEST_CASE("smooth activations are independence-independent at k = 1 and 2") {
    for (const char* family : {"ridge-sigmoid", "ridge-tanh", "ridge-gelu"}) {
        for (int k : {1, 2}) {
            for (std::uint64_t seed = 1; seed <= 10; ++seed) {
                auto v = verdict(build_family(canonical(family, FamilyMode::Independence, k, seed)));
                CHECK(v.independent);
                CHECK_FALSE(v.dependency.has_value());
            }
        }
    }
}

TEST_CASE("polynomial activations are never independence-independent") {
    for (const char* family : {"poly1", "poly2", "poly3"}) {
        for (int k : {1, 2, 3}) {
            for (std::uint64_t seed = 1; seed <= 10; ++seed) {
                auto v = verdict(build_family(canonical(family, FamilyMode::Independence, k, seed)));
                CHECK_FALSE(v.independent);
                CHECK(v.min_singular_ratio <= 1e-12);
            }
        }
    }
}

TEST_CASE("linear experts produce a zero hessian column in identifiability mode") {
    auto m = build_family(canonical("linear", FamilyMode::Identifiability, 1, 5));
    auto v = verdict(m, 1e-12, 1);
    CHECK_FALSE(v.independent);
    REQUIRE(v.zero_column.has_value());
    const auto& label = m.labels[*v.zero_column];
    int order = 0;
    for (int t : label.eta_order) order += t;
    CHECK(order == 2);  // some second derivative of an affine function
}

TEST_CASE("normalized ridge fails the full second-order identifiability set") {
    // On the scalar default domain x/||x|| is constant and the family
    // collapses outright; on a sign-straddling domain it still only takes
    // two values, leaving a multi-dimensional null space.
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto v = verdict(build_family(canonical("nridge-sigmoid", FamilyMode::Identifiability, 1, seed)));
        CHECK_FALSE(v.independent);
    }
    FamilyConfig flipped = canonical("nridge-sigmoid", FamilyMode::Identifiability, 1, 7);
    flipped.domain = {1, -1.5, 1.5};
    CHECK_FALSE(verdict(build_family(flipped)).independent);

    // With d = 2 the feature map varies smoothly, the gating pair that kills
    // the plain ridge is genuinely broken, yet ||x/||x|||| = 1 still forces
    // d2h/da1^2 + d2h/da2^2 = d2h/db^2 exactly.
    FamilyConfig cfg;
    cfg.spec = ExpertSpec::parse("nridge-sigmoid", 2);
    cfg.mode = FamilyMode::Identifiability;
    cfg.domain = {2, 0.5, 1.5};
    ParamSampler sampler;
    sampler.count = 1;
    cfg.sampler = sampler;
    cfg.seed = 7;
    auto m = build_family(cfg);
    auto v = verdict(m);
    CHECK_FALSE(v.independent);
    REQUIRE(v.dependency.has_value());
    const int col_da1a1 = find_column(m, 0, {0, 0}, {2, 0, 0});
    const int col_da2a2 = find_column(m, 0, {0, 0}, {0, 2, 0});
    const int col_dbb = find_column(m, 0, {0, 0}, {0, 0, 2});
    REQUIRE(col_da1a1 >= 0);
    REQUIRE(col_da2a2 >= 0);
    REQUIRE(col_dbb >= 0);
    double identity_sq = 0.0, scale_sq = 0.0;
    for (int r = 0; r < m.rows; ++r) {
        const double resid = m.at(r, col_da1a1) + m.at(r, col_da2a2) - m.at(r, col_dbb);
        identity_sq += resid * resid;
        scale_sq += m.at(r, col_dbb) * m.at(r, col_dbb);
    }
    CHECK(identity_sq <= 1e-24 * scale_sq);

    // the first-order ridge-killing pair is broken by the normalization:
    // dh/da1 and x1 dh/db are far from collinear
    const int col_da1 = find_column(m, 0, {0, 0}, {1, 0, 0});
    const int col_x1db = find_column(m, 0, {1, 0}, {0, 0, 1});
    REQUIRE(col_da1 >= 0);
    REQUIRE(col_x1db >= 0);
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (int r = 0; r < m.rows; ++r) {
        dot += m.at(r, col_da1) * m.at(r, col_x1db);
        na += m.at(r, col_da1) * m.at(r, col_da1);
        nb += m.at(r, col_x1db) * m.at(r, col_x1db);
    }
    CHECK(dot * dot < 0.999 * na * nb);
}

TEST_CASE("a duplicated column forces the ratio to the exact-dependency level") {
    auto m = build_family(canonical("ridge-sigmoid", FamilyMode::Independence, 2, 9));
    CHECK(verdict(m).independent);
    FamilyMatrix padded = m;
    padded.cols += 1;
    padded.labels.push_back(m.labels[4]);
    padded.values.clear();
    padded.values.reserve(static_cast<std::size_t>(padded.rows) * padded.cols);
    for (int r = 0; r < m.rows; ++r) {
        for (int c = 0; c < m.cols; ++c) padded.values.push_back(m.at(r, c));
        padded.values.push_back(m.at(r, 4));
    }
    auto v = verdict(padded, 1e-12, 1);
    CHECK_FALSE(v.independent);
    CHECK(v.min_singular_ratio <= 1e-12);
}

TEST_CASE("verdict validates its knobs") {
    auto m = build_family(canonical("ridge-sigmoid", FamilyMode::Independence, 1, 2));
    CHECK_THROWS_AS(verdict(m, 0.0, 5), InputError);
    CHECK_THROWS_AS(verdict(m, 1.5, 5), InputError);
    CHECK_THROWS_AS(verdict(m, 1e-12, 0), InputError);
}

TEST_CASE("pde interaction detection") {
    auto ridge = ExpertSpec::parse("ridge-sigmoid", 1);
    CHECK(detect_pde_interaction(ridge, Atom{0.0, {1.0}, {0.0, 1.0}}).interacts);
    CHECK_FALSE(detect_pde_interaction(ridge, Atom{0.0, {1.0}, {1.0, 1.0}}).interacts);

    auto lin = ExpertSpec::parse("linear", 1);
    auto rep = detect_pde_interaction(lin, Atom{0.0, {1.0}, {1.0, 2.0}});
    CHECK(rep.interacts);
    CHECK(rep.description.find("d2F/dbeta1.db") != std::string::npos);

    auto poly = ExpertSpec::parse("poly3", 1);
    CHECK(detect_pde_interaction(poly, Atom{0.0, {1.0}, {1.0, 2.0}}).interacts);

    auto regime2 = detect_pde_interaction(ridge, Atom{0.0, {1.0}, {0.0, 1.0}});
    CHECK(regime2.description.find("sigma'(b)") != std::string::npos);
}

TEST_CASE("column labels render readably") {
    auto m = build_family(canonical("ridge-sigmoid", FamilyMode::Identifiability, 1, 1));
    bool saw_h = false, saw_mixed = false;
    for (const auto& l : m.labels) {
        const auto text = l.text();
        if (text == "h[atom 1]") saw_h = true;
        if (text == "d2h/da.db[atom 1]") saw_mixed = true;
    }
    CHECK(saw_h);
    CHECK(saw_mixed);
}
