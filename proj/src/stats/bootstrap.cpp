#include <algorithm>
#include <cmath>

#include "council/errors.hpp"
#include "council/stats.hpp"
#include "council/stats_kernels.hpp"

namespace council::stats {

BootstrapCi bootstrap_ci(const std::vector<double>& a, const std::vector<double>& b, int resamples,
                         bool paired, std::uint64_t seed, Kernel kernel, double confidence) {
    if (confidence <= 0.0 || confidence >= 1.0) {
        throw ConfigError("bootstrap confidence must lie in (0,1)");
    }
    std::vector<double> stats = paired
                                    ? bootstrap_paired_mean_diffs(a, b, resamples, seed, kernel)
                                    : bootstrap_mean_diffs(a, b, resamples, seed, kernel);
    std::sort(stats.begin(), stats.end());

    // Nearest-rank percentile: index ceil(q·R) − 1.
    auto pick = [&](double q) {
        auto idx = static_cast<std::size_t>(
            std::max(0.0, std::ceil(q * static_cast<double>(stats.size())) - 1.0));
        return stats[std::min(idx, stats.size() - 1)];
    };
    double tail = (1.0 - confidence) / 2.0;

    BootstrapCi ci;
    ci.lo = pick(tail);
    ci.hi = pick(1.0 - tail);
    ci.resamples = resamples;
    ci.seed = seed;
    return ci;
}

} // namespace council::stats
