#pragma once

// Counting and resampling kernels behind the exact tests and the bootstrap.
// Each kernel has a serial reference implementation and an OpenMP variant
// that must produce bit-identical results; stats_bench compares their wall
// time, the test suite compares their outputs.

#include <cstdint>
#include <vector>

namespace council::stats {

enum class Kernel { Serial, Parallel };

// C(n, k) in unsigned 64-bit; throws ConfigError on overflow.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

// Pooled mid-ranks scaled by 2 so tied averages (x.5) stay integral.
// `values` are ranked ascending; ties share the average rank.
std::vector<long long> scaled_mid_ranks(const std::vector<double>& values);

// Tie correction term sum over groups of t tied values: Σ (t³ − t).
double tie_term(const std::vector<double>& values);

// Number of k-subsets of `scaled_ranks` whose element sum is <= / >= bound.
// The combination space [0, C(n,k)) is partitioned by combinatorial
// unranking, so the parallel variant counts disjoint chunks.
std::uint64_t count_subset_sums_leq(const std::vector<long long>& scaled_ranks, std::size_t k,
                                    long long bound, Kernel kernel);
std::uint64_t count_subset_sums_geq(const std::vector<long long>& scaled_ranks, std::size_t k,
                                    long long bound, Kernel kernel);

// Number of sign masks (2^n) whose positive-part sum is <= / >= bound; the
// Wilcoxon exact null. Mask space is chunked the same way.
std::uint64_t count_mask_sums_leq(const std::vector<long long>& scaled_ranks, long long bound,
                                  Kernel kernel);
std::uint64_t count_mask_sums_geq(const std::vector<long long>& scaled_ranks, long long bound,
                                  Kernel kernel);

// Bootstrap resample statistics. Each resample r draws with replacement
// using its own SplitMix64 seeded with derive_seed(seed, r), so the output
// vector is identical for the serial and parallel kernels and for any
// thread count.
//
// Unpaired: statistic r = mean(resample(a)) − mean(resample(b)); b may be
// empty, in which case the statistic is mean(resample(a)).
std::vector<double> bootstrap_mean_diffs(const std::vector<double>& a,
                                         const std::vector<double>& b, int resamples,
                                         std::uint64_t seed, Kernel kernel);
// Paired: resamples index pairs (a_i, b_i) jointly.
std::vector<double> bootstrap_paired_mean_diffs(const std::vector<double>& a,
                                                const std::vector<double>& b, int resamples,
                                                std::uint64_t seed, Kernel kernel);

} // namespace council::stats
