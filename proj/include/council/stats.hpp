#pragma once

// Nonparametric statistics: Mann-Whitney U, Wilcoxon signed-rank, percentile
// bootstrap, ICC(3,1), Pearson and Spearman correlation. One-tailed p-values
// are reported as-is even when the data run against the alternative.

#include <cstdint>
#include <string>
#include <vector>

#include "council/stats_kernels.hpp"
#include "council/types.hpp"

namespace council::stats {

enum class Method { Auto, Exact, Approx };

// Auto switches from exact enumeration to the corrected normal approximation
// above this pooled (or nonzero paired) n.
inline constexpr std::size_t kExactThreshold = 12;

// |r| >= large -> "large", >= medium -> "medium", >= small -> "small",
// else "negligible".
std::string effect_band(double r, const EffectBands& bands = {});

// Standard normal CDF.
double normal_cdf(double z);

// Two-sided p for Student's t with df degrees of freedom (regularized
// incomplete beta).
double student_t_two_sided_p(double t, double df);

// U of the first sample from rank sums with average ranks. `alternative` is
// "less" (first sample stochastically smaller) or "greater". Exact p
// enumerates C(n, n_a) rank assignments; the approximation applies tie and
// continuity corrections. r = 1 − 2U/(n_a·n_b): positive means the first
// sample sits lower. Throws DegenerateStatError when every pooled value is
// identical.
StatResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b,
                          const std::string& alternative, Method method = Method::Auto,
                          Kernel kernel = Kernel::Parallel, const EffectBands& bands = {});

// Signed-rank test on paired differences. Zeros are dropped and counted;
// W+ is the statistic. `alternative` "greater" means differences > 0. Exact
// p enumerates 2^n sign patterns. r = (W+ − W−)/(W+ + W−). Throws
// DegenerateStatError when all differences are zero.
StatResult wilcoxon_signed_rank(const std::vector<double>& diffs, const std::string& alternative,
                                Method method = Method::Auto, Kernel kernel = Kernel::Parallel,
                                const EffectBands& bands = {});

// Percentile 95% CI of the mean difference (or of the mean of `a` when `b`
// is empty). Unpaired resampling draws each group independently; paired
// resampling draws index pairs. Deterministic given `seed`.
BootstrapCi bootstrap_ci(const std::vector<double>& a, const std::vector<double>& b, int resamples,
                         bool paired, std::uint64_t seed, Kernel kernel = Kernel::Parallel,
                         double confidence = 0.95);

// ICC(3,1): two-way mixed, consistency, single measure. `rows` is n subjects
// by k raters, rectangular and complete. Throws DegenerateStatError when the
// denominator vanishes.
double icc_3_1(const std::vector<std::vector<double>>& rows);

// Product-moment correlation; throws DegenerateStatError on zero variance.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

// Pearson on average ranks.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// Two-sided p for an observed Pearson r at sample size n (t-distributed
// under the null).
double pearson_two_sided_p(double r, std::size_t n);

// Average ranks (1-based, ties averaged) of `values`.
std::vector<double> average_ranks(const std::vector<double>& values);

} // namespace council::stats
