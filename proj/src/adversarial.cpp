#include "moe/adversarial.hpp"

#include <cmath>
#include <sstream>

#include "moe/errors.hpp"

namespace moe {

namespace {

void check_witness_inputs(const MixingMeasure& truth, long n) {
    truth.validate();
    if (n < 2) throw InputError("witness construction needs n >= 2");
}

// copy true atoms 2..k* behind the two split atoms
void append_tail(MixingMeasure& gn, const MixingMeasure& truth) {
    for (int i = 1; i < truth.size(); ++i) gn.atoms.push_back(truth.atoms[i]);
}

}  // namespace

MixingMeasure construct_gn_polynomial(const MixingMeasure& truth, long n, double r) {
    check_witness_inputs(truth, n);
    if (truth.expert_spec.family != ExpertFamily::Linear)
        throw InputError("polynomial witness requires the linear expert family");
    if (!(r >= 1.0)) throw InputError("witness requires r >= 1");

    const Atom& first = truth.atoms.front();
    const int d = truth.input_dim();
    const double nn = static_cast<double>(n);
    const double half_weight = 0.5 * std::exp(first.gate_bias) + 0.5 / std::pow(nn, r + 1.0);

    MixingMeasure gn;
    gn.expert_spec = truth.expert_spec;
    for (int split = 0; split < 2; ++split) {
        Atom a = first;
        a.gate_bias = std::log(half_weight);
        a.expert[d] = first.expert[d] + (split == 0 ? 1.0 : -1.0) / nn;
        gn.atoms.push_back(std::move(a));
    }
    append_tail(gn, truth);
    return gn;
}

RidgeConstruction construct_gn_ridge(const MixingMeasure& truth, long n, double r) {
    check_witness_inputs(truth, n);
    if (!truth.expert_spec.uses_activation())
        throw InputError("ridge witness requires a ridge expert family");
    if (!(r >= 1.0)) throw InputError("witness requires r >= 1");
    const int d = truth.input_dim();
    const Atom& first = truth.atoms.front();
    for (int i = 0; i < d; ++i)
        if (first.expert[i] != 0.0)
            throw InputError("ridge witness requires the first true atom to have a = 0");

    // smallest odd integer >= r
    int taylor_order = static_cast<int>(std::ceil(r));
    if (taylor_order % 2 == 0) ++taylor_order;
    const ActivationFn& act = truth.expert_spec.activation;
    if (taylor_order > act.max_derivative_order())
        throw CapabilityError("activation '" + act.name() + "' lacks derivatives to order " +
                              std::to_string(taylor_order));

    const double b_star = first.expert[d];
    const double nn = static_cast<double>(n);
    // q(c)/c = sum_alpha coeff[alpha] c^{alpha-1}
    std::vector<double> coeff(taylor_order + 1, 0.0);
    double fact = 1.0;
    double scale = 0.0;
    for (int alpha = 1; alpha <= taylor_order; ++alpha) {
        fact *= alpha;
        coeff[alpha] = (1.0 + std::pow(2.0, alpha)) * act.derivative(alpha, b_star) /
                       (fact * std::pow(nn, alpha));
        scale = std::max(scale, std::abs(coeff[alpha]));
    }
    auto companion = [&](double c) {
        double acc = 0.0;
        for (int alpha = taylor_order; alpha >= 1; --alpha) acc = acc * c + coeff[alpha];
        return acc;
    };

    // sign-change scan of q(c)/c over +-logarithmic grids, then bisection
    const int grid_points = 2048;
    const double lo = 1e-6, hi = 1e3;
    double root = 0.0;
    bool found = false;
    for (int sign = 0; sign < 2 && !found; ++sign) {
        const double s = sign == 0 ? 1.0 : -1.0;
        double prev_c = s * lo;
        double prev_v = companion(prev_c);
        for (int i = 1; i < grid_points && !found; ++i) {
            const double c = s * lo * std::pow(hi / lo, static_cast<double>(i) / (grid_points - 1));
            const double v = companion(c);
            if (prev_v == 0.0) {
                root = prev_c;
                found = true;
                break;
            }
            if (v == 0.0 || (prev_v < 0.0) != (v < 0.0)) {
                double a = prev_c, b = c, fa = prev_v;
                for (int iter = 0; iter < 200; ++iter) {
                    const double mid = 0.5 * (a + b);
                    const double fm = companion(mid);
                    if (fm == 0.0 || std::abs(b - a) < 1e-12 * std::abs(mid)) {
                        a = b = mid;
                        break;
                    }
                    if ((fa < 0.0) != (fm < 0.0)) {
                        b = mid;
                    } else {
                        a = mid;
                        fa = fm;
                    }
                }
                root = 0.5 * (a + b);
                found = true;
            }
            prev_c = c;
            prev_v = v;
        }
    }
    if (!found) {
        std::ostringstream os;
        os << "no nonzero real root of q(c)/c in |c| <= 1e3 for activation " << act.name()
           << ", b* = " << b_star << ", r = " << r << ", n = " << n
           << "; the witness construction is infeasible here";
        throw ConstructionError(os.str());
    }

    RidgeConstruction out;
    out.taylor_order = taylor_order;
    out.root = root;
    out.residual = scale > 0.0 ? std::abs(companion(root) * root) / scale : 0.0;

    MixingMeasure gn;
    gn.expert_spec = truth.expert_spec;
    const double half_weight = 0.5 * std::exp(first.gate_bias);
    for (int split = 0; split < 2; ++split) {
        Atom a = first;
        a.gate_bias = std::log(half_weight);
        a.expert[d] = b_star + (split == 0 ? 1.0 : 2.0) * root / nn;
        gn.atoms.push_back(std::move(a));
    }
    append_tail(gn, truth);
    out.measure = std::move(gn);
    return out;
}

RatioCurve ratio_curve(const MixingMeasure& truth, double r, const std::vector<long>& n_grid,
                       const L2Measure& mu, const WitnessConstructor& constructor) {
    if (n_grid.empty()) throw InputError("ratio curve needs a nonempty grid");
    RatioCurve curve;
    curve.n_grid = n_grid;
    for (long n : n_grid) {
        const MixingMeasure gn = constructor(truth, n, r);
        const double loss = loss_d3(gn, truth, r).total;
        const double dist = l2_distance(gn, truth, mu);
        curve.losses.push_back(loss);
        curve.distances.push_back(dist);
        curve.ratios.push_back(dist / loss);
    }
    return curve;
}

}  // namespace moe
