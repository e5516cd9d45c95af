#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

namespace mincusum {

/// Monte Carlo point estimate with its error bar.
struct Estimate {
    double value = std::numeric_limits<double>::quiet_NaN();
    double se = std::numeric_limits<double>::quiet_NaN();
    std::size_t n_effective = 0;  // paths/samples surviving any conditioning
    std::size_t n_nominal = 0;    // paths/samples drawn
    std::size_t n_truncated = 0;  // paths that hit the horizon
    bool lower_bound_only = false;

    bool defined() const noexcept { return n_effective > 0 && std::isfinite(value); }
};

/// Frequency estimate: SE = sqrt(p(1-p)/m).
inline Estimate proportion(std::size_t hits, std::size_t effective, std::size_t nominal) {
    Estimate e;
    e.n_effective = effective;
    e.n_nominal = nominal;
    if (effective == 0) return e;
    const double m = static_cast<double>(effective);
    e.value = static_cast<double>(hits) / m;
    e.se = std::sqrt(e.value * (1.0 - e.value) / m);
    return e;
}

/// Sample mean with SE = s/sqrt(n), summed in index order.
inline Estimate sample_mean(std::span<const double> xs, std::size_t nominal) {
    Estimate e;
    e.n_effective = xs.size();
    e.n_nominal = nominal;
    if (xs.empty()) return e;
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t k = 0;
    for (double x : xs) {  // Welford
        ++k;
        const double delta = x - mean;
        mean += delta / static_cast<double>(k);
        m2 += delta * (x - mean);
    }
    e.value = mean;
    e.se = k > 1 ? std::sqrt(m2 / static_cast<double>(k - 1) / static_cast<double>(k)) : 0.0;
    return e;
}

}  // namespace mincusum
