#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "moe/dataset.hpp"
#include "moe/estimate.hpp"
#include "moe/losses.hpp"
#include "moe/model.hpp"

namespace moe {

/// Synthetic regression data: X i.i.d. from the input distribution,
/// Y = f_truth(X) + Normal(0, noise_var). Bit-identical for a fixed seed.
Dataset generate_dataset(const MixingMeasure& truth, long n, double noise_var,
                         const InputDist& input, std::uint64_t seed);

enum class Setting { ExactSpecified, OverSpecified };
enum class LossKind { D1, D2, D3 };
enum class SweepMetric { Voronoi, L2 };

struct SweepConfig {
    MixingMeasure truth;
    Setting setting = Setting::ExactSpecified;
    std::vector<long> n_grid;
    int replications = 20;
    LossKind loss = LossKind::D2;
    double d3_r = 1.0;
    SweepMetric metric = SweepMetric::Voronoi;
    double noise_var = 1.0;
    InputDist input;
    FitConfig fit;
    std::uint64_t master_seed = 2024;
    int threads = 0;  // 0: hardware concurrency (capped by MOE_LAB_THREADS)

    int fitted_components() const {
        return truth.size() + (setting == Setting::OverSpecified ? 1 : 0);
    }
};

struct ReplicationResult {
    std::uint64_t seed = 0;
    double loss = 0.0;
    bool diverged = false;
    std::string error;
};

struct SampleSizeStats {
    long n = 0;
    double mean = 0.0;
    double stddev = 0.0;
    int divergent = 0;
    std::vector<ReplicationResult> replications;
};

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

struct SweepReport {
    SweepConfig config;
    std::vector<SampleSizeStats> stats;
    std::optional<SlopeFit> slope;  // absent for degenerate grids; flagged in the summary
    std::vector<std::optional<SlopeFit>> per_replication_slopes;
    double wall_seconds = 0.0;  // not written to report files
};

/// Ordinary least squares on (log n, log value). Throws InputError for fewer
/// than two distinct n or nonpositive values.
SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points);

/// One fit per (n, replication) with seeds derived from the master seed:
/// generate data, initialize near the truth with a fresh random cell
/// partition, run SGD, gauge-fix, record the configured Voronoi loss (or the
/// L2 distance under SweepMetric::L2) against the truth. Replications run in
/// parallel; results are independent of the schedule. Diverged replications
/// are excluded from the means; more than 20% divergent is an error.
SweepReport run_sweep(const SweepConfig& cfg);

/// run_sweep with the recorded quantity forced to the L2 metric.
SweepReport l2_rate_sweep(SweepConfig cfg);

/// Worker count: explicit > 0 wins, else MOE_LAB_THREADS, else hardware.
int resolve_threads(int requested);

std::vector<long> log_spaced_grid(long lo, long hi, int count);

}  // namespace moe
