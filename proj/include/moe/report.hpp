#pragma once

#include <string>

#include <json.hpp>

#include "moe/adversarial.hpp"
#include "moe/harness.hpp"
#include "moe/model.hpp"

namespace moe {

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

nlohmann::json measure_to_json(const MixingMeasure& g);
MixingMeasure measure_from_json(const nlohmann::json& j);

nlohmann::json sweep_config_to_json(const SweepConfig& cfg);
nlohmann::json report_to_json(const SweepReport& report);

/// Writes sweep.csv (n, rep, loss, seed, diverged), summary.json and
/// loglog.svg into dir. Keys in `extra` are merged into the summary's top
/// level. Refuses to write a report with no usable replications.
void write_sweep_files(const SweepReport& report, const std::string& dir,
                       const nlohmann::json& extra = nlohmann::json::object());

/// Writes ratio_curve.csv (n, d3r_loss, l2_distance, ratio) and ratio.svg.
void write_ratio_files(const RatioCurve& curve, const std::string& dir,
                       const nlohmann::json& extra = nlohmann::json::object());

/// Writes a two-column epoch/objective CSV.
void write_trace_csv(const std::vector<double>& trace, const std::string& path);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace moe
