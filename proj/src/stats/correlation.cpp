#include <cmath>

#include "council/errors.hpp"
#include "council/stats.hpp"

namespace council::stats {

namespace {

// Continued fraction for the regularized incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;

    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

double regularized_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                   b * std::log1p(-x);
    double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * beta_cf(a, b, x) / a;
    return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

} // namespace

double student_t_two_sided_p(double t, double df) {
    if (df <= 0.0) throw DegenerateStatError("t distribution needs df > 0");
    double x = df / (df + t * t);
    return regularized_incomplete_beta(df / 2.0, 0.5, x);
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ConfigError("pearson: length mismatch");
    std::size_t n = x.size();
    if (n < 2) throw DegenerateStatError("pearson: need at least 2 points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw DegenerateStatError("pearson: zero variance");
    return sxy / std::sqrt(sxx * syy);
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ConfigError("spearman: length mismatch");
    return pearson(average_ranks(x), average_ranks(y));
}

double pearson_two_sided_p(double r, std::size_t n) {
    if (n < 3) throw DegenerateStatError("pearson p-value needs n >= 3");
    double df = static_cast<double>(n) - 2.0;
    if (std::fabs(r) >= 1.0) return 0.0;
    double t = r * std::sqrt(df / (1.0 - r * r));
    return student_t_two_sided_p(t, df);
}

double icc_3_1(const std::vector<std::vector<double>>& rows) {
    std::size_t n = rows.size();
    if (n < 2) throw DegenerateStatError("icc_3_1: need at least 2 subjects");
    std::size_t k = rows.front().size();
    if (k < 2) throw DegenerateStatError("icc_3_1: need at least 2 raters");
    for (const auto& row : rows) {
        if (row.size() != k) throw ConfigError("icc_3_1: ragged matrix");
    }

    double grand = 0.0;
    std::vector<double> row_mean(n, 0.0), col_mean(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            grand += rows[i][j];
            row_mean[i] += rows[i][j];
            col_mean[j] += rows[i][j];
        }
    }
    grand /= static_cast<double>(n * k);
    for (auto& m : row_mean) m /= static_cast<double>(k);
    for (auto& m : col_mean) m /= static_cast<double>(n);

    double ss_rows = 0.0, ss_cols = 0.0, ss_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss_rows += (row_mean[i] - grand) * (row_mean[i] - grand);
    ss_rows *= static_cast<double>(k);
    for (std::size_t j = 0; j < k; ++j) ss_cols += (col_mean[j] - grand) * (col_mean[j] - grand);
    ss_cols *= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            ss_total += (rows[i][j] - grand) * (rows[i][j] - grand);
        }
    }
    double ss_err = ss_total - ss_rows - ss_cols;

    double ms_rows = ss_rows / static_cast<double>(n - 1);
    double ms_err = ss_err / static_cast<double>((n - 1) * (k - 1));
    if (ms_rows <= 0.0) {
        throw DegenerateStatError("icc_3_1: zero between-subject variance, ICC undefined");
    }
    double denom = ms_rows + static_cast<double>(k - 1) * ms_err;
    if (denom == 0.0) throw DegenerateStatError("icc_3_1: zero denominator");
    return (ms_rows - ms_err) / denom;
}

} // namespace council::stats
