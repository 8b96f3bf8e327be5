#include "moe/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "moe/errors.hpp"

namespace moe {

namespace {

namespace fs = std::filesystem;

std::string svg_header(int w, int h) {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
       << "\" viewBox=\"0 0 " << w << " " << h << "\">\n"
       << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    return os.str();
}

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

// shared log-log scatter; positions are precomputed by the callers
struct LogLogPlot {
    int width = 640, height = 480;
    int left = 70, right = 20, top = 24, bottom = 50;
    double min_x = 0, max_x = 1, min_y = 0, max_y = 1;  // log10 ranges

    double px(double log10x) const {
        return left + (log10x - min_x) / (max_x - min_x) * (width - left - right);
    }
    double py(double log10y) const {
        return height - bottom - (log10y - min_y) / (max_y - min_y) * (height - top - bottom);
    }

    void set_ranges(const std::vector<double>& xs, const std::vector<double>& ys) {
        min_x = *std::min_element(xs.begin(), xs.end());
        max_x = *std::max_element(xs.begin(), xs.end());
        min_y = *std::min_element(ys.begin(), ys.end());
        max_y = *std::max_element(ys.begin(), ys.end());
        if (max_x - min_x < 1e-9) max_x = min_x + 1.0;
        const double pad = std::max(0.05 * (max_y - min_y), 0.05);
        min_y -= pad;
        max_y += pad;
    }

    std::string axes(const std::string& x_label, const std::string& y_label,
                     const std::string& title) const {
        std::ostringstream os;
        os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\""
           << width - left - right << "\" height=\"" << height - top - bottom
           << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (int i = 0; i <= 4; ++i) {
            const double lx = min_x + i * (max_x - min_x) / 4.0;
            const double ly = min_y + i * (max_y - min_y) / 4.0;
            os << "<text x=\"" << fmt(px(lx)) << "\" y=\"" << height - bottom + 18
               << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt(std::pow(10.0, lx), 3)
               << "</text>\n";
            os << "<text x=\"" << left - 6 << "\" y=\"" << fmt(py(ly) + 4)
               << "\" font-size=\"11\" text-anchor=\"end\">" << fmt(std::pow(10.0, ly), 3)
               << "</text>\n";
        }
        os << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 12
           << "\" font-size=\"13\" text-anchor=\"middle\">" << x_label << "</text>\n";
        os << "<text x=\"16\" y=\"" << (top + height - bottom) / 2
           << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
           << (top + height - bottom) / 2 << ")\">" << y_label << "</text>\n";
        os << "<text x=\"" << (left + width - right) / 2 << "\" y=\"16\" font-size=\"13\" "
           << "text-anchor=\"middle\">" << title << "</text>\n";
        return os.str();
    }
};

void write_file_or_throw(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw Error("failed while writing '" + path + "'");
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

nlohmann::json measure_to_json(const MixingMeasure& g) {
    nlohmann::json atoms = nlohmann::json::array();
    for (const auto& a : g.atoms)
        atoms.push_back({{"gate_bias", a.gate_bias},
                         {"gate_slope", a.gate_slope},
                         {"expert", a.expert}});
    return {{"family", g.expert_spec.name()},
            {"input_dim", g.expert_spec.input_dim},
            {"atoms", atoms}};
}

MixingMeasure measure_from_json(const nlohmann::json& j) {
    MixingMeasure g;
    g.expert_spec = ExpertSpec::parse(j.at("family").get<std::string>(),
                                      j.at("input_dim").get<int>());
    for (const auto& ja : j.at("atoms")) {
        Atom a;
        a.gate_bias = ja.at("gate_bias").get<double>();
        a.gate_slope = ja.at("gate_slope").get<std::vector<double>>();
        a.expert = ja.at("expert").get<std::vector<double>>();
        g.atoms.push_back(std::move(a));
    }
    g.validate();
    return g;
}

nlohmann::json sweep_config_to_json(const SweepConfig& cfg) {
    return {{"truth", measure_to_json(cfg.truth)},
            {"setting", cfg.setting == Setting::ExactSpecified ? "exact" : "over"},
            {"n_grid", cfg.n_grid},
            {"replications", cfg.replications},
            {"loss", cfg.metric == SweepMetric::L2      ? "l2"
                     : cfg.loss == LossKind::D1         ? "d1"
                     : cfg.loss == LossKind::D2         ? "d2"
                                                        : "d3"},
            {"d3_r", cfg.d3_r},
            {"metric", cfg.metric == SweepMetric::L2 ? "l2" : "voronoi"},
            {"noise_var", cfg.noise_var},
            {"input", {{"dim", cfg.input.dim}, {"lo", cfg.input.lo}, {"hi", cfg.input.hi}}},
            {"fit",
             {{"k", cfg.fitted_components()},
              {"learning_rate", cfg.fit.learning_rate},
              {"batch_size", cfg.fit.batch_size},
              {"epochs", cfg.fit.epochs},
              {"lr_halving_updates", cfg.fit.lr_halving_updates},
              {"update_budget", cfg.fit.update_budget},
              {"init_spread", cfg.fit.init_spread},
              {"gauge", cfg.fit.gauge == GaugeRule::PinLast ? "pin-last" : "post-hoc-translate"}}},
            {"master_seed", cfg.master_seed}};
}

nlohmann::json report_to_json(const SweepReport& report) {
    nlohmann::json per_n = nlohmann::json::array();
    int divergent_total = 0;
    for (const auto& s : report.stats) {
        divergent_total += s.divergent;
        per_n.push_back({{"n", s.n},
                         {"mean", s.mean},
                         {"stddev", s.stddev},
                         {"divergent", s.divergent}});
    }
    nlohmann::json rep_slopes = nlohmann::json::array();
    for (const auto& s : report.per_replication_slopes) {
        if (s)
            rep_slopes.push_back(s->slope);
        else
            rep_slopes.push_back(nullptr);
    }
    nlohmann::json j{{"config", sweep_config_to_json(report.config)},
                     {"per_n", per_n},
                     {"divergent_total", divergent_total},
                     {"per_replication_slopes", rep_slopes},
                     {"slope_available", report.slope.has_value()}};
    if (report.slope) {
        j["slope"] = report.slope->slope;
        j["intercept"] = report.slope->intercept;
        j["r_squared"] = report.slope->r_squared;
    }
    return j;
}

void write_sweep_files(const SweepReport& report, const std::string& dir,
                       const nlohmann::json& extra) {
    bool any_usable = false;
    for (const auto& s : report.stats)
        for (const auto& r : s.replications)
            if (!r.diverged) any_usable = true;
    if (!any_usable) throw InputError("refusing to write a report with no usable replications");

    fs::create_directories(dir);

    std::ostringstream csv;
    csv << "n,rep,loss,seed,diverged\n";
    for (const auto& s : report.stats) {
        for (std::size_t rep = 0; rep < s.replications.size(); ++rep) {
            const auto& r = s.replications[rep];
            csv << s.n << "," << rep << "," << format_double(r.loss) << "," << r.seed << ","
                << (r.diverged ? 1 : 0) << "\n";
        }
    }
    write_file_or_throw(dir + "/sweep.csv", csv.str());

    nlohmann::json summary = report_to_json(report);
    for (auto it = extra.begin(); it != extra.end(); ++it) summary[it.key()] = it.value();
    write_file_or_throw(dir + "/summary.json", summary.dump(2) + "\n");

    // log-log scatter with +-2 std bars and the fitted line
    LogLogPlot plot;
    std::vector<double> xs, ys;
    for (const auto& s : report.stats) {
        if (s.divergent >= static_cast<int>(s.replications.size()) || s.mean <= 0.0) continue;
        xs.push_back(std::log10(static_cast<double>(s.n)));
        ys.push_back(std::log10(s.mean));
    }
    std::ostringstream svg;
    svg << svg_header(plot.width, plot.height);
    if (!xs.empty()) {
        plot.set_ranges(xs, ys);
        svg << plot.axes("n", "loss",
                         report.config.metric == SweepMetric::L2 ? "L2 distance vs n"
                                                                 : "Voronoi loss vs n");
        std::size_t idx = 0;
        for (const auto& s : report.stats) {
            if (s.divergent >= static_cast<int>(s.replications.size()) || s.mean <= 0.0) continue;
            const double x = plot.px(xs[idx]);
            const double lo = std::max(s.mean - 2.0 * s.stddev, s.mean * 1e-2);
            const double hi = s.mean + 2.0 * s.stddev;
            svg << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(plot.py(std::log10(lo)))
                << "\" x2=\"" << fmt(x) << "\" y2=\"" << fmt(plot.py(std::log10(hi)))
                << "\" stroke=\"steelblue\"/>\n";
            svg << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(plot.py(ys[idx]))
                << "\" r=\"3\" fill=\"steelblue\"/>\n";
            ++idx;
        }
        if (report.slope) {
            const double lx0 = plot.min_x, lx1 = plot.max_x;
            auto line_y = [&](double log10n) {
                const double ln_n = log10n * std::log(10.0);
                const double ln_y = report.slope->intercept + report.slope->slope * ln_n;
                return ln_y / std::log(10.0);
            };
            svg << "<line x1=\"" << fmt(plot.px(lx0)) << "\" y1=\"" << fmt(plot.py(line_y(lx0)))
                << "\" x2=\"" << fmt(plot.px(lx1)) << "\" y2=\"" << fmt(plot.py(line_y(lx1)))
                << "\" stroke=\"darkorange\" stroke-dasharray=\"6 3\"/>\n";
            svg << "<text x=\"" << plot.width - 160 << "\" y=\"" << plot.top + 16
                << "\" font-size=\"12\">slope " << fmt(report.slope->slope) << "</text>\n";
        }
    }
    svg << "</svg>\n";
    write_file_or_throw(dir + "/loglog.svg", svg.str());
}

void write_ratio_files(const RatioCurve& curve, const std::string& dir,
                       const nlohmann::json& extra) {
    if (curve.n_grid.empty()) throw InputError("refusing to write an empty ratio curve");
    fs::create_directories(dir);

    std::ostringstream csv;
    csv << "n,d3r_loss,l2_distance,ratio\n";
    for (std::size_t i = 0; i < curve.n_grid.size(); ++i)
        csv << curve.n_grid[i] << "," << format_double(curve.losses[i]) << ","
            << format_double(curve.distances[i]) << "," << format_double(curve.ratios[i])
            << "\n";
    write_file_or_throw(dir + "/ratio_curve.csv", csv.str());

    nlohmann::json summary{{"n_grid", curve.n_grid},
                           {"losses", curve.losses},
                           {"distances", curve.distances},
                           {"ratios", curve.ratios}};
    for (auto it = extra.begin(); it != extra.end(); ++it) summary[it.key()] = it.value();
    write_file_or_throw(dir + "/summary.json", summary.dump(2) + "\n");

    LogLogPlot plot;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < curve.n_grid.size(); ++i) {
        if (curve.ratios[i] <= 0.0) continue;
        xs.push_back(std::log10(static_cast<double>(curve.n_grid[i])));
        ys.push_back(std::log10(curve.ratios[i]));
    }
    std::ostringstream svg;
    svg << svg_header(plot.width, plot.height);
    if (!xs.empty()) {
        plot.set_ranges(xs, ys);
        svg << plot.axes("n", "L2 / D3r ratio", "witness ratio vs n");
        for (std::size_t i = 0; i < xs.size(); ++i) {
            svg << "<circle cx=\"" << fmt(plot.px(xs[i])) << "\" cy=\"" << fmt(plot.py(ys[i]))
                << "\" r=\"3\" fill=\"steelblue\"/>\n";
            if (i > 0)
                svg << "<line x1=\"" << fmt(plot.px(xs[i - 1])) << "\" y1=\""
                    << fmt(plot.py(ys[i - 1])) << "\" x2=\"" << fmt(plot.px(xs[i]))
                    << "\" y2=\"" << fmt(plot.py(ys[i])) << "\" stroke=\"steelblue\"/>\n";
        }
    }
    svg << "</svg>\n";
    write_file_or_throw(dir + "/ratio.svg", svg.str());
}

void write_trace_csv(const std::vector<double>& trace, const std::string& path) {
    std::ostringstream csv;
    csv << "epoch,objective\n";
    for (std::size_t i = 0; i < trace.size(); ++i)
        csv << i << "," << format_double(trace[i]) << "\n";
    write_file_or_throw(path, csv.str());
}

void write_text_file(const std::string& path, const std::string& content) {
    write_file_or_throw(path, content);
}

}  // namespace moe
