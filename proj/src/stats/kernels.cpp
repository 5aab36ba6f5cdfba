#include "council/stats_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "council/errors.hpp"
#include "council/rng.hpp"
#include "council/stats.hpp"

namespace council::stats {

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 acc = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        acc = acc * (n - k + i) / i;
        if (acc > static_cast<unsigned __int128>(UINT64_MAX)) {
            throw ConfigError("binomial(" + std::to_string(n) + ", " + std::to_string(k) +
                              ") exceeds 64 bits");
        }
    }
    return static_cast<std::uint64_t>(acc);
}

std::vector<double> average_ranks(const std::vector<double>& values) {
    std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

std::vector<long long> scaled_mid_ranks(const std::vector<double>& values) {
    std::vector<double> ranks = average_ranks(values);
    std::vector<long long> scaled(ranks.size());
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        scaled[i] = std::llround(2.0 * ranks[i]); // averages are k or k+.5, so exact
    }
    return scaled;
}

double tie_term(const std::vector<double>& values) {
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    double term = 0.0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        double t = static_cast<double>(j - i + 1);
        term += t * t * t - t;
        i = j + 1;
    }
    return term;
}

namespace {

// Lexicographically `rank`-th k-combination of {0..n-1} (combinatorial
// number system).
std::vector<std::size_t> unrank_combination(std::uint64_t rank, std::size_t n, std::size_t k) {
    std::vector<std::size_t> c(k);
    std::size_t v = 0;
    for (std::size_t i = 0; i < k; ++i) {
        for (;;) {
            std::uint64_t below = binomial(n - 1 - v, k - 1 - i);
            if (rank < below) break;
            rank -= below;
            ++v;
        }
        c[i] = v++;
    }
    return c;
}

bool next_combination(std::vector<std::size_t>& c, std::size_t n) {
    std::size_t k = c.size();
    std::size_t i = k;
    while (i > 0) {
        --i;
        if (c[i] != n - k + i) {
            ++c[i];
            for (std::size_t j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
            return true;
        }
    }
    return false;
}

long long combination_sum(const std::vector<long long>& ranks, const std::vector<std::size_t>& c) {
    long long s = 0;
    for (std::size_t idx : c) s += ranks[idx];
    return s;
}

// Subsets with index in [first, last) whose sum satisfies cmp(sum, bound).
template <typename Cmp>
std::uint64_t count_combination_range(const std::vector<long long>& ranks, std::size_t k,
                                      long long bound, std::uint64_t first, std::uint64_t last,
                                      Cmp cmp) {
    if (first >= last) return 0;
    std::size_t n = ranks.size();
    std::vector<std::size_t> c = unrank_combination(first, n, k);
    std::uint64_t count = 0;
    for (std::uint64_t idx = first; idx < last; ++idx) {
        if (cmp(combination_sum(ranks, c), bound)) ++count;
        if (idx + 1 < last && !next_combination(c, n)) break;
    }
    return count;
}

template <typename Cmp>
std::uint64_t count_subset_sums(const std::vector<long long>& ranks, std::size_t k,
                                long long bound, Kernel kernel, Cmp cmp) {
    std::size_t n = ranks.size();
    if (k > n) throw ConfigError("subset size exceeds pool size");
    std::uint64_t total = binomial(n, k);

    if (kernel == Kernel::Serial) {
        // Reference path: plain first-to-last walk, no unranking.
        if (k == 0) return cmp(0, bound) ? 1 : 0;
        std::vector<std::size_t> c(k);
        std::iota(c.begin(), c.end(), std::size_t{0});
        std::uint64_t count = 0;
        do {
            if (cmp(combination_sum(ranks, c), bound)) ++count;
        } while (next_combination(c, n));
        return count;
    }

    std::uint64_t n_chunks = std::min<std::uint64_t>(total, 256);
    if (n_chunks == 0) return 0;
    std::uint64_t per = (total + n_chunks - 1) / n_chunks;
    std::uint64_t count = 0;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) reduction(+ : count)
#endif
    for (long long chunk = 0; chunk < static_cast<long long>(n_chunks); ++chunk) {
        std::uint64_t first = static_cast<std::uint64_t>(chunk) * per;
        std::uint64_t last = std::min(first + per, total);
        count += count_combination_range(ranks, k, bound, first, last, cmp);
    }
    return count;
}

template <typename Cmp>
std::uint64_t count_mask_sums(const std::vector<long long>& ranks, long long bound, Kernel kernel,
                              Cmp cmp) {
    std::size_t n = ranks.size();
    if (n >= 63) throw ConfigError("sign enumeration infeasible for n >= 63");
    std::uint64_t total = std::uint64_t{1} << n;

    auto count_range = [&](std::uint64_t first, std::uint64_t last) {
        std::uint64_t count = 0;
        for (std::uint64_t mask = first; mask < last; ++mask) {
            long long s = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (mask & (std::uint64_t{1} << i)) s += ranks[i];
            }
            if (cmp(s, bound)) ++count;
        }
        return count;
    };

    if (kernel == Kernel::Serial) return count_range(0, total);

    std::uint64_t n_chunks = std::min<std::uint64_t>(total, 256);
    std::uint64_t per = (total + n_chunks - 1) / n_chunks;
    std::uint64_t count = 0;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) reduction(+ : count)
#endif
    for (long long chunk = 0; chunk < static_cast<long long>(n_chunks); ++chunk) {
        std::uint64_t first = static_cast<std::uint64_t>(chunk) * per;
        std::uint64_t last = std::min(first + per, total);
        count += count_range(first, last);
    }
    return count;
}

} // namespace

std::uint64_t count_subset_sums_leq(const std::vector<long long>& scaled_ranks, std::size_t k,
                                    long long bound, Kernel kernel) {
    return count_subset_sums(scaled_ranks, k, bound, kernel,
                             [](long long s, long long b) { return s <= b; });
}

std::uint64_t count_subset_sums_geq(const std::vector<long long>& scaled_ranks, std::size_t k,
                                    long long bound, Kernel kernel) {
    return count_subset_sums(scaled_ranks, k, bound, kernel,
                             [](long long s, long long b) { return s >= b; });
}

std::uint64_t count_mask_sums_leq(const std::vector<long long>& scaled_ranks, long long bound,
                                  Kernel kernel) {
    return count_mask_sums(scaled_ranks, bound, kernel,
                           [](long long s, long long b) { return s <= b; });
}

std::uint64_t count_mask_sums_geq(const std::vector<long long>& scaled_ranks, long long bound,
                                  Kernel kernel) {
    return count_mask_sums(scaled_ranks, bound, kernel,
                           [](long long s, long long b) { return s >= b; });
}

namespace {

double resample_mean(const std::vector<double>& v, SplitMix64& rng) {
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) sum += v[rng.uniform_index(v.size())];
    return sum / static_cast<double>(v.size());
}

template <typename PerResample>
std::vector<double> run_resamples(int resamples, std::uint64_t seed, Kernel kernel,
                                  PerResample fn) {
    if (resamples < 1) throw ConfigError("bootstrap needs at least one resample");
    std::vector<double> out(static_cast<std::size_t>(resamples));
    if (kernel == Kernel::Serial) {
        for (int r = 0; r < resamples; ++r) {
            SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
            out[static_cast<std::size_t>(r)] = fn(rng);
        }
        return out;
    }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long r = 0; r < resamples; ++r) {
        SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        out[static_cast<std::size_t>(r)] = fn(rng);
    }
    return out;
}

} // namespace

std::vector<double> bootstrap_mean_diffs(const std::vector<double>& a,
                                         const std::vector<double>& b, int resamples,
                                         std::uint64_t seed, Kernel kernel) {
    if (a.empty()) throw DegenerateStatError("bootstrap: empty sample");
    return run_resamples(resamples, seed, kernel, [&](SplitMix64& rng) {
        double ma = resample_mean(a, rng);
        double mb = b.empty() ? 0.0 : resample_mean(b, rng);
        return ma - mb;
    });
}

std::vector<double> bootstrap_paired_mean_diffs(const std::vector<double>& a,
                                                const std::vector<double>& b, int resamples,
                                                std::uint64_t seed, Kernel kernel) {
    if (a.empty() || a.size() != b.size()) {
        throw DegenerateStatError("paired bootstrap needs equal-sized non-empty samples");
    }
    return run_resamples(resamples, seed, kernel, [&](SplitMix64& rng) {
        double sum = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            std::size_t j = rng.uniform_index(a.size());
            sum += a[j] - b[j];
        }
        return sum / static_cast<double>(a.size());
    });
}

} // namespace council::stats
