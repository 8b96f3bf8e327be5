#include "moe/presets.hpp"

#include "moe/errors.hpp"
#include "moe/harness.hpp"

namespace moe {

MixingMeasure benchmark_truth(const ExpertSpec& spec) {
    if (spec.input_dim != 1) throw InputError("the benchmark truth is one-dimensional");
    MixingMeasure g;
    g.expert_spec = spec;
    g.atoms.push_back({0.0, {1.0}, {-1.0, 2.0}});
    g.atoms.push_back({0.0, {0.0}, {1.0, 2.0}});
    return g;
}

MixingMeasure input_independent_truth(const ExpertSpec& spec, double b1) {
    if (spec.input_dim != 1) throw InputError("the benchmark truth is one-dimensional");
    MixingMeasure g;
    g.expert_spec = spec;
    g.atoms.push_back({0.0, {1.0}, {0.0, b1}});
    g.atoms.push_back({0.0, {0.0}, {1.0, 2.0}});
    return g;
}

std::vector<long> full_grid() { return log_spaced_grid(10000, 100000, 20); }

std::vector<long> quick_grid() { return log_spaced_grid(1000, 10000, 10); }

}  // namespace moe
