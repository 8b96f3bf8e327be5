#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace moe {

/// Regression sample: n rows of x (flattened row-major) and n responses.
struct Dataset {
    int dim = 1;
    std::vector<double> xs;  // n * dim
    std::vector<double> ys;  // n
    double noise_var = 0.0;
    std::uint64_t seed = 0;

    long size() const { return static_cast<long>(ys.size()); }
    std::span<const double> x(long i) const {
        return {xs.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
    }
};

/// Input distribution for synthetic data: uniform over [lo, hi]^dim.
struct InputDist {
    int dim = 1;
    double lo = 0.0, hi = 1.0;
};

}  // namespace moe
