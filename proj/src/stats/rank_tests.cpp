#include "council/stats.hpp"

#include <algorithm>
#include <cmath>

#include "council/errors.hpp"
#include "council/stats_kernels.hpp"

namespace council::stats {

std::string effect_band(double r, const EffectBands& bands) {
    double m = std::fabs(r);
    if (m >= bands.large_r) return "large";
    if (m >= bands.medium_r) return "medium";
    if (m >= bands.small_r) return "small";
    return "negligible";
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

namespace {

constexpr std::uint64_t kExactStateCap = 100'000'000ULL;

void check_alternative(const std::string& alternative) {
    if (alternative != "less" && alternative != "greater") {
        throw ConfigError("alternative must be 'less' or 'greater', got '" + alternative + "'");
    }
}

Method resolve(Method method, std::size_t n) {
    if (method != Method::Auto) return method;
    return n <= kExactThreshold ? Method::Exact : Method::Approx;
}

const char* method_name(Method m) {
    return m == Method::Exact ? "exact_enumeration" : "normal_approximation";
}

} // namespace

StatResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b,
                          const std::string& alternative, Method method, Kernel kernel,
                          const EffectBands& bands) {
    check_alternative(alternative);
    if (a.empty() || b.empty()) throw DegenerateStatError("mann_whitney_u: empty sample");
    std::size_t n_a = a.size(), n_b = b.size(), n = n_a + n_b;

    std::vector<double> pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());
    auto [lo_it, hi_it] = std::minmax_element(pooled.begin(), pooled.end());
    if (*lo_it == *hi_it) {
        throw DegenerateStatError("mann_whitney_u: every pooled value is identical");
    }

    std::vector<double> ranks = average_ranks(pooled);
    double rank_sum_a = 0.0;
    for (std::size_t i = 0; i < n_a; ++i) rank_sum_a += ranks[i];
    double u = rank_sum_a - static_cast<double>(n_a) * (static_cast<double>(n_a) + 1.0) / 2.0;

    Method m = resolve(method, n);
    double p = 0.0;
    if (m == Method::Exact) {
        std::uint64_t total = binomial(n, n_a);
        if (total > kExactStateCap) {
            throw ConfigError("mann_whitney_u: exact enumeration infeasible at n_a=" +
                              std::to_string(n_a) + ", n_b=" + std::to_string(n_b));
        }
        std::vector<long long> scaled = scaled_mid_ranks(pooled);
        // 2U = 2R_a − n_a(n_a+1); compare subset sums of doubled ranks.
        long long bound = std::llround(2.0 * u) + static_cast<long long>(n_a) *
                                                      (static_cast<long long>(n_a) + 1);
        std::uint64_t hits = alternative == "less"
                                 ? count_subset_sums_leq(scaled, n_a, bound, kernel)
                                 : count_subset_sums_geq(scaled, n_a, bound, kernel);
        p = static_cast<double>(hits) / static_cast<double>(total);
    } else {
        double mu = static_cast<double>(n_a) * static_cast<double>(n_b) / 2.0;
        double nn = static_cast<double>(n);
        double sigma2 = (static_cast<double>(n_a) * static_cast<double>(n_b) / 12.0) *
                        ((nn + 1.0) - tie_term(pooled) / (nn * (nn - 1.0)));
        if (sigma2 <= 0.0) {
            throw DegenerateStatError("mann_whitney_u: zero variance under the null");
        }
        double sigma = std::sqrt(sigma2);
        p = alternative == "less" ? normal_cdf((u - mu + 0.5) / sigma)
                                  : 1.0 - normal_cdf((u - mu - 0.5) / sigma);
    }

    StatResult res;
    res.test = "mann_whitney_u";
    res.statistic = u;
    res.p_value = p;
    res.alternative = alternative;
    res.method = method_name(m);
    res.rank_biserial = 1.0 - 2.0 * u / (static_cast<double>(n_a) * static_cast<double>(n_b));
    res.effect_band = effect_band(res.rank_biserial, bands);
    res.n_a = n_a;
    res.n_b = n_b;
    return res;
}

StatResult wilcoxon_signed_rank(const std::vector<double>& diffs, const std::string& alternative,
                                Method method, Kernel kernel, const EffectBands& bands) {
    check_alternative(alternative);
    std::vector<double> magnitudes;
    std::vector<int> signs;
    std::size_t zeros = 0;
    for (double d : diffs) {
        if (d == 0.0) {
            ++zeros;
            continue;
        }
        magnitudes.push_back(std::fabs(d));
        signs.push_back(d > 0.0 ? 1 : -1);
    }
    if (magnitudes.empty()) {
        throw DegenerateStatError("wilcoxon_signed_rank: all differences are zero");
    }
    std::size_t n = magnitudes.size();

    std::vector<double> ranks = average_ranks(magnitudes);
    double w_plus = 0.0, w_minus = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        (signs[i] > 0 ? w_plus : w_minus) += ranks[i];
    }

    Method m = resolve(method, n);
    double p = 0.0;
    if (m == Method::Exact) {
        if (n > 26) {
            throw ConfigError("wilcoxon_signed_rank: exact enumeration infeasible at n=" +
                              std::to_string(n));
        }
        std::vector<long long> scaled = scaled_mid_ranks(magnitudes);
        long long bound = std::llround(2.0 * w_plus);
        std::uint64_t total = std::uint64_t{1} << n;
        std::uint64_t hits = alternative == "greater"
                                 ? count_mask_sums_geq(scaled, bound, kernel)
                                 : count_mask_sums_leq(scaled, bound, kernel);
        p = static_cast<double>(hits) / static_cast<double>(total);
    } else {
        double nn = static_cast<double>(n);
        double mu = nn * (nn + 1.0) / 4.0;
        double sigma2 = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term(magnitudes) / 48.0;
        if (sigma2 <= 0.0) {
            throw DegenerateStatError("wilcoxon_signed_rank: zero variance under the null");
        }
        double sigma = std::sqrt(sigma2);
        p = alternative == "greater" ? 1.0 - normal_cdf((w_plus - mu - 0.5) / sigma)
                                     : normal_cdf((w_plus - mu + 0.5) / sigma);
    }

    StatResult res;
    res.test = "wilcoxon_signed_rank";
    res.statistic = w_plus;
    res.p_value = p;
    res.alternative = alternative;
    res.method = method_name(m);
    res.rank_biserial = (w_plus - w_minus) / (w_plus + w_minus);
    res.effect_band = effect_band(res.rank_biserial, bands);
    res.n_a = diffs.size();
    res.n_b = diffs.size();
    res.zeros_dropped = zeros;
    return res;
}

} // namespace council::stats
