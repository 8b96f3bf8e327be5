// moe-lab: fit softmax-gated mixture-of-experts regressions, sweep
// convergence rates, test expert identifiability, and trace adversarial
// witness curves. See README.md for usage.

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "moe/adversarial.hpp"
#include "moe/errors.hpp"
#include "moe/estimate.hpp"
#include "moe/harness.hpp"
#include "moe/identify.hpp"
#include "moe/losses.hpp"
#include "moe/presets.hpp"
#include "moe/report.hpp"
#include "moe/rng.hpp"

namespace {

using nlohmann::json;

struct ConfigError : moe::InputError {
    using moe::InputError::InputError;
};

// every value the four commands can consume, pre-filled with defaults
struct RunConfig {
    std::string family = "ridge-sigmoid";
    std::string activation;  // check: alternative to --family
    std::string mode = "independence";
    std::string setting = "exact";
    std::string loss;  // resolved per family when empty
    double r = 1.0;
    std::string metric = "voronoi";
    long n = 10000;
    std::vector<long> n_grid;
    int replications = -1;
    int k = -1;
    double noise_var = 1.0;
    double learning_rate = 0.05;
    int batch_size = 64;
    int epochs = 0;
    long lr_halving_updates = 40000;
    long update_budget = 320000;
    double init_spread = 0.03;
    std::string gauge = "post-hoc-translate";
    std::uint64_t master_seed = 2024;
    std::string out = "out";
    bool quick = false;
    int trials = 5;
    double threshold = 1e-12;
    double b1 = 2.0;
    int threads = 0;
    std::optional<json> truth_json;
};

void check_keys(const json& j, const std::vector<std::string>& allowed,
                const std::string& scope) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ConfigError("unknown config key '" + (scope.empty() ? "" : scope + ".") +
                              it.key() + "'");
    }
}

// config-file values apply only where no flag was passed
void apply_config_file(const std::string& path, const std::string& command, RunConfig& cfg,
                       const CLI::App* cmd) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");

    std::vector<std::string> allowed = {"family", "out", "seed", "threads", "noise_var",
                                        "fit", "truth"};
    if (command == "sweep") {
        for (const char* key : {"setting", "n_grid", "replications", "loss", "r", "metric",
                                "quick"})
            allowed.push_back(key);
    } else if (command == "fit") {
        for (const char* key : {"n", "k", "loss", "r"}) allowed.push_back(key);
    } else if (command == "check") {
        for (const char* key : {"mode", "activation", "k", "trials", "threshold"})
            allowed.push_back(key);
    } else if (command == "adversarial") {
        for (const char* key : {"r", "n_grid", "b1"}) allowed.push_back(key);
    }
    check_keys(doc, allowed, "");

    auto flag_given = [&](const std::string& flag) {
        const CLI::Option* opt = cmd->get_option_no_throw(flag);
        return opt != nullptr && opt->count() > 0;
    };
    auto load = [&](const char* key, const std::string& flag, auto& target) {
        if (doc.contains(key) && !flag_given(flag)) doc.at(key).get_to(target);
    };

    load("family", "--family", cfg.family);
    load("out", "--out", cfg.out);
    load("seed", "--seed", cfg.master_seed);
    load("threads", "--threads", cfg.threads);
    load("noise_var", "--noise", cfg.noise_var);
    load("setting", "--setting", cfg.setting);
    load("n_grid", "--n-grid", cfg.n_grid);
    load("replications", "--replications", cfg.replications);
    load("loss", "--loss", cfg.loss);
    load("r", "--r", cfg.r);
    load("metric", "--metric", cfg.metric);
    load("n", "--n", cfg.n);
    load("k", "--k", cfg.k);
    load("mode", "--mode", cfg.mode);
    load("activation", "--activation", cfg.activation);
    load("trials", "--trials", cfg.trials);
    load("threshold", "--threshold", cfg.threshold);
    load("b1", "--b1", cfg.b1);
    if (doc.contains("quick") && !flag_given("--quick")) cfg.quick = doc.at("quick").get<bool>();

    if (doc.contains("fit")) {
        const json& f = doc.at("fit");
        check_keys(f, {"learning_rate", "batch_size", "epochs", "lr_halving_updates",
                       "update_budget", "init_spread", "gauge"},
                   "fit");
        auto loadf = [&](const char* key, const std::string& flag, auto& target) {
            if (f.contains(key) && !flag_given(flag)) f.at(key).get_to(target);
        };
        loadf("learning_rate", "--lr", cfg.learning_rate);
        loadf("batch_size", "--batch", cfg.batch_size);
        loadf("epochs", "--epochs", cfg.epochs);
        loadf("lr_halving_updates", "--lr-halving", cfg.lr_halving_updates);
        loadf("update_budget", "--update-budget", cfg.update_budget);
        loadf("init_spread", "--spread", cfg.init_spread);
        loadf("gauge", "--gauge", cfg.gauge);
    }
    if (doc.contains("truth")) {
        const json& t = doc.at("truth");
        check_keys(t, {"family", "input_dim", "atoms"}, "truth");
        for (const auto& atom : t.at("atoms"))
            check_keys(atom, {"gate_bias", "gate_slope", "expert"}, "truth.atoms[]");
        cfg.truth_json = t;
    }
}

moe::ExpertSpec spec_for(const RunConfig& cfg) {
    if (!cfg.activation.empty()) return moe::ExpertSpec::parse("ridge-" + cfg.activation, 1);
    return moe::ExpertSpec::parse(cfg.family, 1);
}

moe::MixingMeasure resolve_truth(const RunConfig& cfg, const moe::ExpertSpec& spec) {
    if (cfg.truth_json) {
        json t = *cfg.truth_json;
        if (!t.contains("family")) t["family"] = spec.name();
        if (!t.contains("input_dim")) t["input_dim"] = spec.input_dim;
        return moe::measure_from_json(t);
    }
    return moe::benchmark_truth(spec);
}

moe::LossKind resolve_loss(const RunConfig& cfg, const moe::ExpertSpec& spec,
                           std::string& name_out) {
    std::string name = cfg.loss;
    if (name.empty())
        name = (spec.family == moe::ExpertFamily::Linear ||
                spec.family == moe::ExpertFamily::Polynomial)
                   ? "d3"
                   : "d2";
    name_out = name;
    if (name == "d1") return moe::LossKind::D1;
    if (name == "d2") return moe::LossKind::D2;
    if (name == "d3") return moe::LossKind::D3;
    throw ConfigError("unknown loss '" + name + "' (expected d1, d2 or d3)");
}

moe::GaugeRule resolve_gauge(const RunConfig& cfg) {
    if (cfg.gauge == "pin-last") return moe::GaugeRule::PinLast;
    if (cfg.gauge == "post-hoc-translate") return moe::GaugeRule::PostHocTranslate;
    throw ConfigError("unknown gauge '" + cfg.gauge + "'");
}

moe::FitConfig fit_config(const RunConfig& cfg) {
    moe::FitConfig fit;
    fit.learning_rate = cfg.learning_rate;
    fit.batch_size = cfg.batch_size;
    fit.epochs = cfg.epochs;
    fit.lr_halving_updates = cfg.lr_halving_updates;
    fit.update_budget = cfg.update_budget;
    fit.init_spread = cfg.init_spread;
    fit.gauge = resolve_gauge(cfg);
    return fit;
}

json effective_fit_json(const moe::FitConfig& fit) {
    return {{"learning_rate", fit.learning_rate},
            {"batch_size", fit.batch_size},
            {"epochs", fit.epochs},
            {"lr_halving_updates", fit.lr_halving_updates},
            {"update_budget", fit.update_budget},
            {"init_spread", fit.init_spread},
            {"gauge", fit.gauge == moe::GaugeRule::PinLast ? "pin-last" : "post-hoc-translate"}};
}

int cmd_fit(const RunConfig& cfg) {
    const moe::ExpertSpec spec = spec_for(cfg);
    const moe::MixingMeasure truth = resolve_truth(cfg, spec);
    const int k = cfg.k > 0 ? cfg.k : truth.size();

    const moe::Dataset data =
        moe::generate_dataset(truth, cfg.n, cfg.noise_var, moe::InputDist{1, 0.0, 1.0},
                              moe::derive_seed(cfg.master_seed, 0, 0, moe::stage_tag("data")));

    // an under-specified fit (k < k*) starts from the first k reference atoms
    moe::MixingMeasure reference = truth;
    if (k < truth.size())
        reference.atoms.assign(truth.atoms.begin(), truth.atoms.begin() + k);
    const moe::MixingMeasure start = moe::init_near_truth(
        reference, k, cfg.init_spread,
        moe::derive_seed(cfg.master_seed, 0, 0, moe::stage_tag("init")));

    moe::FitConfig fit = fit_config(cfg);
    fit.k = k;
    fit.seed = moe::derive_seed(cfg.master_seed, 0, 0, moe::stage_tag("sgd"));
    const moe::FitResult result = moe::fit_sgd(data, start, fit, &truth);
    const moe::MixingMeasure fitted = moe::gauge_fix(result.measure, truth, fit.gauge);

    std::string loss_name;
    resolve_loss(cfg, spec, loss_name);
    json summary{{"command", "fit"},
                 {"family", spec.name()},
                 {"n", cfg.n},
                 {"k", k},
                 {"noise_var", cfg.noise_var},
                 {"seed", cfg.master_seed},
                 {"fit", effective_fit_json(fit)},
                 {"truth", moe::measure_to_json(truth)},
                 {"final_objective", result.final_objective},
                 {"iterations", result.iterations},
                 {"loss_d1", moe::loss_d1(fitted, truth).total},
                 {"loss_d2", moe::loss_d2(fitted, truth).total},
                 {"loss_d3", moe::loss_d3(fitted, truth, cfg.r).total},
                 {"loss_d3_r", cfg.r},
                 {"out", cfg.out}};

    std::filesystem::create_directories(cfg.out);
    moe::write_text_file(cfg.out + "/fitted_measure.json",
                         moe::measure_to_json(fitted).dump(2) + "\n");
    moe::write_trace_csv(result.objective_trace, cfg.out + "/objective_trace.csv");
    moe::write_text_file(cfg.out + "/summary.json", summary.dump(2) + "\n");
    std::cout << "fit: final objective " << result.final_objective << ", " << loss_name
              << " vs truth " << summary["loss_" + loss_name].get<double>() << "\n";
    return 0;
}

int cmd_sweep(const RunConfig& cfg) {
    const moe::ExpertSpec spec = spec_for(cfg);
    moe::SweepConfig sweep;
    sweep.truth = resolve_truth(cfg, spec);
    if (cfg.setting == "exact")
        sweep.setting = moe::Setting::ExactSpecified;
    else if (cfg.setting == "over")
        sweep.setting = moe::Setting::OverSpecified;
    else
        throw ConfigError("unknown setting '" + cfg.setting + "' (expected exact or over)");

    std::string loss_name;
    sweep.loss = resolve_loss(cfg, spec, loss_name);
    sweep.d3_r = cfg.r;
    if (cfg.metric == "l2")
        sweep.metric = moe::SweepMetric::L2;
    else if (cfg.metric != "voronoi")
        throw ConfigError("unknown metric '" + cfg.metric + "' (expected voronoi or l2)");

    sweep.n_grid = !cfg.n_grid.empty() ? cfg.n_grid
                   : cfg.quick         ? moe::quick_grid()
                                       : moe::full_grid();
    sweep.replications = cfg.replications > 0 ? cfg.replications : (cfg.quick ? 10 : 20);
    sweep.noise_var = cfg.noise_var;
    sweep.fit = fit_config(cfg);
    sweep.master_seed = cfg.master_seed;
    sweep.threads = cfg.threads;

    const moe::SweepReport report = moe::run_sweep(sweep);
    json extra{{"command", "sweep"}, {"family", spec.name()}, {"quick", cfg.quick},
               {"out", cfg.out}};
    moe::write_sweep_files(report, cfg.out, extra);
    std::cout << "sweep: " << sweep.n_grid.size() << " sizes x " << sweep.replications
              << " replications";
    if (report.slope)
        std::cout << ", slope " << report.slope->slope << " (r^2 " << report.slope->r_squared
                  << ")";
    else
        std::cout << ", slope unavailable (degenerate grid)";
    std::cout << " in " << report.wall_seconds << "s\n";
    return 0;
}

int cmd_check(const RunConfig& cfg) {
    const moe::ExpertSpec spec = spec_for(cfg);
    moe::FamilyConfig family;
    family.spec = spec;
    if (cfg.mode == "identifiability")
        family.mode = moe::FamilyMode::Identifiability;
    else if (cfg.mode == "independence")
        family.mode = moe::FamilyMode::Independence;
    else
        throw ConfigError("unknown mode '" + cfg.mode + "'");
    family.domain = moe::default_domain(spec, family.mode);
    moe::ParamSampler sampler;
    sampler.count = cfg.k > 0 ? cfg.k : 2;
    family.sampler = sampler;
    family.seed = cfg.master_seed;

    const moe::FamilyMatrix matrix = moe::build_family(family);
    const moe::IndependenceVerdict v = moe::verdict(matrix, cfg.threshold, cfg.trials);

    json summary{{"command", "check"},
                 {"family", spec.name()},
                 {"mode", cfg.mode},
                 {"k", cfg.k > 0 ? cfg.k : 2},
                 {"trials", cfg.trials},
                 {"threshold", cfg.threshold},
                 {"seed", cfg.master_seed},
                 {"columns", matrix.cols},
                 {"rows", matrix.rows},
                 {"independent", v.independent},
                 {"min_singular_ratio", v.min_singular_ratio},
                 {"note", "numerical verdict: evidence, not proof"},
                 {"out", cfg.out}};
    std::cout << (v.independent ? "independent" : "dependent")
              << " (min singular ratio " << v.min_singular_ratio << ")\n";
    if (v.dependency) {
        const std::string text = moe::describe_dependency(*v.dependency, matrix.labels);
        summary["dependency"] = text;
        std::cout << "dependency: " << text << "\n";
    }
    if (v.zero_column) {
        summary["zero_column"] = matrix.labels[*v.zero_column].text();
        std::cout << "zero column: " << matrix.labels[*v.zero_column].text() << "\n";
    }
    const moe::PdeReport pde =
        moe::detect_pde_interaction(spec, moe::benchmark_truth(spec).atoms.front());
    summary["pde_interaction"] = pde.interacts;
    if (pde.interacts) summary["pde_description"] = pde.description;

    std::filesystem::create_directories(cfg.out);
    moe::write_text_file(cfg.out + "/verdict.json", summary.dump(2) + "\n");
    moe::write_text_file(cfg.out + "/summary.json", summary.dump(2) + "\n");
    return 0;
}

int cmd_adversarial(const RunConfig& cfg) {
    const moe::ExpertSpec spec = spec_for(cfg);
    std::vector<long> grid = cfg.n_grid.empty() ? std::vector<long>{10, 100, 1000} : cfg.n_grid;
    const moe::L2Measure mu = moe::L2Measure::uniform01(1);

    moe::MixingMeasure truth;
    moe::WitnessConstructor constructor;
    std::vector<json> roots;
    if (spec.family == moe::ExpertFamily::Linear) {
        truth = moe::benchmark_truth(spec);
        constructor = [](const moe::MixingMeasure& t, long n, double r) {
            return moe::construct_gn_polynomial(t, n, r);
        };
    } else if (spec.uses_activation()) {
        truth = moe::input_independent_truth(spec, cfg.b1);
        constructor = [&roots](const moe::MixingMeasure& t, long n, double r) {
            moe::RidgeConstruction c = moe::construct_gn_ridge(t, n, r);
            roots.push_back({{"n", n}, {"root", c.root}, {"residual", c.residual}});
            return c.measure;
        };
    } else {
        throw ConfigError("adversarial curves support linear or ridge families");
    }

    const moe::RatioCurve curve = moe::ratio_curve(truth, cfg.r, grid, mu, constructor);
    json extra{{"command", "adversarial"},
               {"family", spec.name()},
               {"r", cfg.r},
               {"truth", moe::measure_to_json(truth)},
               {"seed", cfg.master_seed},
               {"out", cfg.out}};
    if (!roots.empty()) extra["roots"] = roots;
    moe::write_ratio_files(curve, cfg.out, extra);
    std::cout << "adversarial: ratio " << curve.ratios.front() << " -> " << curve.ratios.back()
              << " over n " << grid.front() << ".." << grid.back() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    std::string config_path;

    CLI::App app{"softmax-gated mixture-of-experts estimation lab"};
    app.require_subcommand(1);

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file");
        cmd->add_option("--family", cfg.family, "expert family (linear, poly2, ridge-sigmoid, ...)");
        cmd->add_option("--out", cfg.out, "output directory");
        cmd->add_option("--seed", cfg.master_seed, "master seed");
        cmd->add_option("--threads", cfg.threads, "worker threads (0: hardware, capped by MOE_LAB_THREADS)");
        cmd->add_option("--noise", cfg.noise_var, "noise variance");
        cmd->add_option("--lr", cfg.learning_rate, "SGD learning rate");
        cmd->add_option("--batch", cfg.batch_size, "SGD batch size");
        cmd->add_option("--epochs", cfg.epochs, "SGD epochs (0: derive from the update budget)");
        cmd->add_option("--lr-halving", cfg.lr_halving_updates, "SGD steps between halvings");
        cmd->add_option("--update-budget", cfg.update_budget, "total SGD steps when epochs are derived");
        cmd->add_option("--spread", cfg.init_spread, "init perturbation std");
        cmd->add_option("--gauge", cfg.gauge, "pin-last or post-hoc-translate");
    };

    CLI::App* fit = app.add_subcommand("fit", "fit one dataset and write the fitted measure");
    add_common(fit);
    fit->add_option("--n", cfg.n, "sample size");
    fit->add_option("--k", cfg.k, "fitted component budget");
    fit->add_option("--r", cfg.r, "power for the d3 loss report");

    CLI::App* sweep = app.add_subcommand("sweep", "convergence-rate sweep over sample sizes");
    add_common(sweep);
    sweep->add_option("--setting", cfg.setting, "exact or over");
    sweep->add_option("--n-grid", cfg.n_grid, "explicit sample sizes");
    sweep->add_option("--replications", cfg.replications, "replications per size");
    sweep->add_option("--loss", cfg.loss, "d1, d2 or d3");
    sweep->add_option("--r", cfg.r, "power for d3");
    sweep->add_option("--metric", cfg.metric, "voronoi or l2");
    sweep->add_flag("--quick", cfg.quick, "small CI grid");

    CLI::App* check = app.add_subcommand("check", "identifiability / independence verdict");
    add_common(check);
    check->add_option("--mode", cfg.mode, "identifiability or independence");
    check->add_option("--activation", cfg.activation, "activation (alternative to --family)");
    check->add_option("--k", cfg.k, "number of parameter tuples");
    check->add_option("--trials", cfg.trials, "re-sampling trials");
    check->add_option("--threshold", cfg.threshold, "singular-ratio threshold");

    CLI::App* adversarial = app.add_subcommand("adversarial", "witness ratio curve");
    add_common(adversarial);
    adversarial->add_option("--r", cfg.r, "loss power r");
    adversarial->add_option("--n-grid", cfg.n_grid, "witness grid");
    adversarial->add_option("--b1", cfg.b1, "intercept of the input-independent true expert");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        CLI::App* cmd = app.get_subcommands().front();
        const std::string name = cmd->get_name();
        if (!config_path.empty()) apply_config_file(config_path, name, cfg, cmd);
        if (name == "fit") return cmd_fit(cfg);
        if (name == "sweep") return cmd_sweep(cfg);
        if (name == "check") return cmd_check(cfg);
        return cmd_adversarial(cfg);
    } catch (const moe::CapabilityError& e) {
        std::cerr << "capability error: " << e.what() << "\n";
        return 4;
    } catch (const moe::ConstructionError& e) {
        std::cerr << "construction infeasible: " << e.what() << "\n";
        return 5;
    } catch (const moe::DivergenceError& e) {
        std::cerr << "optimization diverged: " << e.what() << "\n";
        return 3;
    } catch (const moe::InputError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
