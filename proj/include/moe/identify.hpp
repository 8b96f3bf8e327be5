#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "moe/model.hpp"

namespace moe {

/// Which function family gets rank-tested.
///   Identifiability: x^nu * d^|tau| h / d eta^tau, 0 <= |nu|+|tau| <= 2.
///   Independence:    x^nu * sigma^(tau)(a.x + b),  |nu| <= 2, tau <= 2.
enum class FamilyMode { Identifiability, Independence };

struct SampleDomain {
    int dim = 1;
    double lo = -1.0, hi = 1.0;
};

struct ColumnLabel {
    int atom = 0;
    std::vector<int> x_power;    // nu
    std::vector<int> eta_order;  // tau (Identifiability mode)
    int sigma_order = -1;        // tau (Independence mode)
    std::string text() const;
};

/// Draw eta_j = (a, b) with slope entries of magnitude in
/// [slope_mag_lo, slope_mag_hi] (random sign) and intercepts uniform in
/// [intercept_lo, intercept_hi], rejecting tuples closer than min_separation.
/// Slopes are kept away from zero: a vanishing slope makes the ridge columns
/// collapse onto monomials for every activation, which is the degenerate
/// regime rather than a property of the activation under test.
struct ParamSampler {
    int count = 2;
    double slope_mag_lo = 1.0, slope_mag_hi = 3.0;
    double intercept_lo = -2.0, intercept_hi = 2.0;
    double min_separation = 1e-3;
};

struct FamilyConfig {
    ExpertSpec spec;
    FamilyMode mode = FamilyMode::Identifiability;
    std::vector<std::vector<double>> params;  // explicit eta_j (ignored if sampler set)
    std::optional<ParamSampler> sampler;
    SampleDomain domain;
    std::uint64_t seed = 1;
    int min_rows = 512;  // rows = max(8 * columns, min_rows)
};

struct FamilyMatrix {
    int rows = 0, cols = 0;
    std::vector<double> values;  // row-major
    std::vector<ColumnLabel> labels;
    FamilyConfig config;

    double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
};

/// Sampled function-family matrix. Throws InputError for coincident
/// parameters and CapabilityError if a needed derivative is unsupported.
FamilyMatrix build_family(const FamilyConfig& cfg);

struct IndependenceVerdict {
    double min_singular_ratio = 0.0;  // sigma_min / sigma_max, column-normalized
    bool independent = false;
    /// Unit coefficient vector of the near-null direction when dependent.
    std::optional<std::vector<double>> dependency;
    std::optional<int> zero_column;  // set when a column is identically zero
};

/// Rank test with re-sampled trials: each trial redraws sample points (and
/// parameters, when a sampler is configured) with a trial-mixed seed, and the
/// verdict keeps the maximal ratio so an unlucky sample cannot fake a
/// dependency. A numerical verdict is evidence, not proof.
///
/// The default threshold sits at the double-precision separation level:
/// exact function identities land at or below ~1e-16 while analytically
/// independent families with one or two atoms stay above ~1e-9. With three
/// or more atoms the smooth-family conditioning can sink below the threshold,
/// so positive verdicts are only meaningful for small atom counts.
IndependenceVerdict verdict(const FamilyMatrix& m, double threshold = 1e-12, int trials = 5);

/// Render a dependency vector against labels, largest coefficients first.
std::string describe_dependency(const std::vector<double>& coeffs,
                                const std::vector<ColumnLabel>& labels, double cutoff = 1e-3);

struct PdeReport {
    bool interacts = false;
    std::string description;
};

/// Known gating/expert interactions: polynomial-family experts satisfy
/// d2F/dbeta1 db = dF/da for F = exp(beta1.x) h(x); a ridge atom with a = 0
/// satisfies dF/dbeta1 = sigma'(b) dF/da.
PdeReport detect_pde_interaction(const ExpertSpec& spec, const Atom& atom);

/// Default sampling domain for a family's checks. Identifiability mode uses
/// [-1, 1]^d, shifted to [0.5, 1.5]^d for normalized-input experts so the
/// feature map is smooth. Independence mode uses [-3, 3]^d: on a narrow
/// window every smooth activation is numerically indistinguishable from a
/// low-degree polynomial, which would blur the verdicts.
SampleDomain default_domain(const ExpertSpec& spec, FamilyMode mode);

}  // namespace moe
