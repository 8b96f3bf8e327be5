#include "moe/identify.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "moe/errors.hpp"
#include "moe/rng.hpp"

namespace moe {

namespace {

// multi-indices of length m with |idx| <= budget, graded lexicographic
std::vector<std::vector<int>> multi_indices(int m, int budget) {
    std::vector<std::vector<int>> out;
    std::vector<int> idx(m, 0);
    for (int total = 0; total <= budget; ++total) {
        // enumerate compositions of `total` into m parts
        std::vector<int> comp(m, 0);
        comp[0] = total;
        for (;;) {
            if (m > 0) out.push_back(comp);
            if (m == 0 || comp[m - 1] == total) break;
            // next composition
            int i = m - 2;
            while (i >= 0 && comp[i] == 0) --i;
            if (i < 0) break;
            --comp[i];
            int tail = total;
            for (int j = 0; j <= i; ++j) tail -= comp[j];
            comp[i + 1] = tail;
            for (int j = i + 2; j < m; ++j) comp[j] = 0;
        }
        if (m == 0 && total == 0) out.push_back({});
    }
    return out;
}

double monomial(std::span<const double> x, const std::vector<int>& powers) {
    double acc = 1.0;
    for (std::size_t i = 0; i < powers.size(); ++i)
        for (int p = 0; p < powers[i]; ++p) acc *= x[i];
    return acc;
}

int order_of(const std::vector<int>& idx) {
    int s = 0;
    for (int v : idx) s += v;
    return s;
}

ActivationFn effective_activation(const ExpertSpec& spec) {
    if (spec.uses_activation()) return spec.activation;
    return ActivationFn{ActKind::Poly, spec.family == ExpertFamily::Polynomial ? spec.degree : 1};
}

std::vector<std::vector<double>> draw_params(const ParamSampler& sampler, int q,
                                             std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<double>> params;
    for (int attempts = 0; static_cast<int>(params.size()) < sampler.count; ++attempts) {
        if (attempts > 10000) throw InputError("could not draw separated parameters");
        std::vector<double> eta(q);
        for (int i = 0; i < q - 1; ++i) {
            const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
            eta[i] = sign * rng.uniform(sampler.slope_mag_lo, sampler.slope_mag_hi);
        }
        eta[q - 1] = rng.uniform(sampler.intercept_lo, sampler.intercept_hi);
        bool ok = true;
        for (const auto& other : params) {
            double dist = 0.0;
            for (int j = 0; j < q; ++j) dist += (eta[j] - other[j]) * (eta[j] - other[j]);
            if (std::sqrt(dist) < sampler.min_separation) ok = false;
        }
        if (ok) params.push_back(std::move(eta));
    }
    return params;
}

void check_separation(const std::vector<std::vector<double>>& params) {
    if (params.empty()) throw InputError("family needs at least one parameter tuple");
    for (std::size_t i = 0; i < params.size(); ++i)
        for (std::size_t j = i + 1; j < params.size(); ++j) {
            double dist = 0.0;
            for (std::size_t c = 0; c < params[i].size(); ++c)
                dist += (params[i][c] - params[j][c]) * (params[i][c] - params[j][c]);
            if (std::sqrt(dist) <= 1e-6)
                throw InputError("parameter tuples " + std::to_string(i) + " and " +
                                 std::to_string(j) + " coincide");
        }
}

}  // namespace

std::string ColumnLabel::text() const {
    std::ostringstream os;
    bool have_monomial = false;
    for (std::size_t i = 0; i < x_power.size(); ++i) {
        if (x_power[i] == 0) continue;
        if (have_monomial) os << "*";
        os << "x" << (x_power.size() > 1 ? std::to_string(i + 1) : "");
        if (x_power[i] > 1) os << "^" << x_power[i];
        have_monomial = true;
    }
    if (have_monomial) os << "*";
    if (sigma_order >= 0) {
        os << "sigma";
        for (int i = 0; i < sigma_order; ++i) os << "'";
        os << "(z_" << atom + 1 << ")";
        return os.str();
    }
    const int total = order_of(eta_order);
    if (total == 0) {
        os << "h";
    } else {
        auto coord = [&](std::size_t i) {
            const std::size_t d = eta_order.size() - 1;
            if (i == d) return std::string("b");
            return eta_order.size() > 2 ? "a" + std::to_string(i + 1) : std::string("a");
        };
        os << (total == 1 ? "dh/d" : "d2h/d");
        bool first = true;
        for (std::size_t i = 0; i < eta_order.size(); ++i)
            for (int rep = 0; rep < eta_order[i]; ++rep) {
                if (!first) os << ".d";
                os << coord(i);
                first = false;
            }
    }
    os << "[atom " << atom + 1 << "]";
    return os.str();
}

FamilyMatrix build_family(const FamilyConfig& cfg) {
    const int d = cfg.spec.input_dim;
    const int q = cfg.spec.param_dim();
    if (cfg.domain.dim != d) throw InputError("sample domain dimension mismatch");

    FamilyMatrix m;
    m.config = cfg;
    if (cfg.sampler)
        m.config.params = draw_params(*cfg.sampler, q, derive_seed(cfg.seed, 0, 0, stage_tag("params")));
    check_separation(m.config.params);
    const auto& params = m.config.params;
    const int k = static_cast<int>(params.size());

    // column labels
    const auto nus = multi_indices(d, 2);
    if (cfg.mode == FamilyMode::Identifiability) {
        const auto taus = multi_indices(q, 2);
        for (int j = 0; j < k; ++j)
            for (const auto& nu : nus)
                for (const auto& tau : taus) {
                    if (order_of(nu) + order_of(tau) > 2) continue;
                    ColumnLabel label;
                    label.atom = j;
                    label.x_power = nu;
                    label.eta_order = tau;
                    m.labels.push_back(std::move(label));
                }
    } else {
        for (int j = 0; j < k; ++j)
            for (const auto& nu : nus)
                for (int t = 0; t <= 2; ++t) {
                    ColumnLabel label;
                    label.atom = j;
                    label.x_power = nu;
                    label.sigma_order = t;
                    m.labels.push_back(std::move(label));
                }
    }

    m.cols = static_cast<int>(m.labels.size());
    m.rows = std::max(8 * m.cols, cfg.min_rows);
    m.values.assign(static_cast<std::size_t>(m.rows) * m.cols, 0.0);

    const ActivationFn act = effective_activation(cfg.spec);
    if (act.max_derivative_order() < 2)
        throw CapabilityError("activation '" + act.name() + "' lacks order-2 derivatives");

    Rng rng(derive_seed(cfg.seed, 1, 0, stage_tag("points")));
    std::vector<double> x(d);
    std::vector<double> grad(q);
    std::vector<double> hess(static_cast<std::size_t>(q) * q);
    for (int r = 0; r < m.rows; ++r) {
        for (auto& xi : x) xi = rng.uniform(cfg.domain.lo, cfg.domain.hi);
        int c = 0;
        for (int j = 0; j < k; ++j) {
            const auto& eta = params[j];
            if (cfg.mode == FamilyMode::Identifiability) {
                const double h = cfg.spec.eval(eta, x);
                cfg.spec.grad(eta, x, grad);
                cfg.spec.hessian(eta, x, hess);
                for (; c < static_cast<int>(m.labels.size()) && m.labels[c].atom == j; ++c) {
                    const auto& label = m.labels[c];
                    const int total = order_of(label.eta_order);
                    double deriv = h;
                    if (total == 1) {
                        for (int i = 0; i < q; ++i)
                            if (label.eta_order[i] == 1) deriv = grad[i];
                    } else if (total == 2) {
                        int first = -1, second = -1;
                        for (int i = 0; i < q; ++i) {
                            if (label.eta_order[i] == 2) first = second = i;
                            if (label.eta_order[i] == 1) (first < 0 ? first : second) = i;
                        }
                        deriv = hess[static_cast<std::size_t>(first) * q + second];
                    }
                    m.values[static_cast<std::size_t>(r) * m.cols + c] =
                        monomial(x, label.x_power) * deriv;
                }
            } else {
                double z = eta[d];
                for (int i = 0; i < d; ++i) z += eta[i] * x[i];
                for (; c < static_cast<int>(m.labels.size()) && m.labels[c].atom == j; ++c) {
                    const auto& label = m.labels[c];
                    m.values[static_cast<std::size_t>(r) * m.cols + c] =
                        monomial(x, label.x_power) * act.derivative(label.sigma_order, z);
                }
            }
        }
    }
    return m;
}

namespace {

struct SingleVerdict {
    double ratio = 0.0;
    std::vector<double> null_direction;
    std::optional<int> zero_column;
};

SingleVerdict analyze(const FamilyMatrix& m) {
    Eigen::MatrixXd a(m.rows, m.cols);
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c) a(r, c) = m.at(r, c);

    SingleVerdict out;
    for (int c = 0; c < m.cols; ++c) {
        const double norm = a.col(c).norm();
        if (norm == 0.0) {
            out.ratio = 0.0;
            out.zero_column = c;
            out.null_direction.assign(m.cols, 0.0);
            out.null_direction[c] = 1.0;
            return out;
        }
        a.col(c) /= norm;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    out.ratio = sv(sv.size() - 1) / sv(0);
    const Eigen::VectorXd v = svd.matrixV().col(sv.size() - 1);
    out.null_direction.assign(v.data(), v.data() + v.size());
    return out;
}

}  // namespace

IndependenceVerdict verdict(const FamilyMatrix& m, double threshold, int trials) {
    if (!(threshold > 0.0 && threshold < 1.0)) throw InputError("threshold must lie in (0, 1)");
    if (trials < 1) throw InputError("trials must be >= 1");

    SingleVerdict best = analyze(m);
    for (int t = 1; t < trials; ++t) {
        FamilyConfig cfg = m.config;
        cfg.seed = derive_seed(m.config.seed, static_cast<std::uint64_t>(t), 0, stage_tag("trial"));
        const SingleVerdict v = analyze(build_family(cfg));
        if (v.ratio > best.ratio) best = v;
    }

    IndependenceVerdict out;
    out.min_singular_ratio = best.ratio;
    out.independent = best.ratio > threshold;
    out.zero_column = best.zero_column;
    if (!out.independent) out.dependency = std::move(best.null_direction);
    return out;
}

std::string describe_dependency(const std::vector<double>& coeffs,
                                const std::vector<ColumnLabel>& labels, double cutoff) {
    std::vector<int> idx(coeffs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return std::abs(coeffs[a]) > std::abs(coeffs[b]); });
    std::ostringstream os;
    bool first = true;
    for (int i : idx) {
        if (std::abs(coeffs[i]) < cutoff) break;
        if (!first) os << " ";
        os << (coeffs[i] >= 0 ? (first ? "" : "+ ") : "- ");
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", std::abs(coeffs[i]));
        os << buf << "*" << labels[i].text();
        first = false;
    }
    return os.str();
}

PdeReport detect_pde_interaction(const ExpertSpec& spec, const Atom& atom) {
    PdeReport report;
    if (spec.family == ExpertFamily::Linear || spec.family == ExpertFamily::Polynomial) {
        report.interacts = true;
        report.description =
            "polynomial-family interaction: d2F/dbeta1.db = dF/da for F = exp(beta1.x) h(x)";
        return report;
    }
    bool zero_slope = true;
    for (int i = 0; i < spec.input_dim; ++i)
        if (atom.expert[i] != 0.0) zero_slope = false;
    if (zero_slope) {
        report.interacts = true;
        report.description =
            "input-independent expert interaction: dF/dbeta1 = sigma'(b) dF/da at a = 0";
    }
    return report;
}

SampleDomain default_domain(const ExpertSpec& spec, FamilyMode mode) {
    SampleDomain dom;
    dom.dim = spec.input_dim;
    if (spec.family == ExpertFamily::NormalizedRidge) {
        dom.lo = 0.5;
        dom.hi = 1.5;
    } else if (mode == FamilyMode::Independence) {
        dom.lo = -3.0;
        dom.hi = 3.0;
    }
    return dom;
}

}  // namespace moe
