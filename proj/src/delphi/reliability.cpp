#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "council/delphi.hpp"
#include "council/errors.hpp"
#include "council/rng.hpp"
#include "council/stats.hpp"

namespace council {

namespace {

constexpr std::uint64_t kRetestLane = 3;
constexpr std::uint64_t kCrossLaneA = 4;
constexpr std::uint64_t kCrossLaneB = 5;

bool same_anchors(const std::vector<CalibrationAnchor>& a,
                  const std::vector<CalibrationAnchor>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].snippet != b[i].snippet || a[i].score != b[i].score) return false;
    }
    return true;
}

const ValuePerspective& lookup(const std::map<std::string, ValuePerspective>& perspectives,
                               const EvaluationRecord& ev) {
    auto it = perspectives.find(ev.perspective);
    if (it == perspectives.end()) {
        throw ConfigError("perspective '" + ev.perspective + "' of role '" + ev.role +
                          "' is not defined");
    }
    return it->second;
}

std::vector<std::pair<std::string, double>> sorted_means(
    const std::map<std::string, std::pair<double, std::size_t>>& sums) {
    std::vector<std::pair<std::string, double>> out;
    for (const auto& [name, acc] : sums) {
        out.emplace_back(name, acc.first / static_cast<double>(acc.second));
    }
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
        if (x.second != y.second) return x.second > y.second;
        return x.first < y.first;
    });
    return out;
}

} // namespace

ReliabilityReport test_retest(const std::vector<DeliberationRecord>& runs,
                              const CoherenceJudge& judge,
                              const std::map<std::string, ValuePerspective>& perspectives,
                              int repetitions) {
    if (runs.empty()) throw ConfigError("test_retest: empty run sample");
    if (repetitions < 2) throw ConfigError("test_retest: repetitions must be >= 2");

    ReliabilityReport report;
    report.repetitions = repetitions;

    std::vector<std::vector<double>> rows;
    std::vector<std::string> row_roles;
    for (const auto& record : runs) {
        const std::uint64_t lane = derive_seed(record.run_seed, kRetestLane);
        for (std::size_t i = 0; i < record.evaluations.size(); ++i) {
            const EvaluationRecord& ev = record.evaluations[i];
            ValidationRequest request =
                build_validation_request(lookup(perspectives, ev), ev.reasoning, judge.anchors());
            std::vector<double> reps;
            try {
                for (int rep = 0; rep < repetitions; ++rep) {
                    std::uint64_t base =
                        (i * static_cast<std::uint64_t>(repetitions) + rep) *
                        static_cast<std::uint64_t>(judge.max_attempts());
                    reps.push_back(judge.score(request, ev.role, lane, base).score);
                }
            } catch (const ValidationError&) {
                ++report.excluded;
                continue;
            } catch (const ProviderError&) {
                ++report.excluded;
                continue;
            } catch (const ProtocolError&) {
                ++report.excluded;
                continue;
            }
            rows.push_back(std::move(reps));
            row_roles.push_back(ev.role);
        }
    }

    report.n = rows.size();
    if (rows.size() < 2) {
        throw DegenerateStatError("test_retest: fewer than two scored assessments (n=" +
                                  std::to_string(rows.size()) + ")");
    }

    report.icc = stats::icc_3_1(rows);

    std::vector<double> first, second, abs_diffs;
    std::map<std::string, std::pair<double, std::size_t>> role_sums;
    std::size_t within = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        double a = rows[r][0];
        double b = rows[r][1];
        first.push_back(a);
        second.push_back(b);
        double d = std::fabs(a - b);
        abs_diffs.push_back(d);
        if (d <= 0.2 + 1e-12) ++within;
        auto& acc = role_sums[row_roles[r]];
        acc.first += d;
        acc.second += 1;
    }
    report.pearson_r = stats::pearson(first, second);
    report.spearman_rho = stats::spearman(first, second);
    double total = 0.0;
    for (double d : abs_diffs) total += d;
    report.mean_abs_diff = total / static_cast<double>(abs_diffs.size());
    report.fraction_within_02 = static_cast<double>(within) / static_cast<double>(rows.size());
    for (const auto& [role, acc] : role_sums) {
        report.per_role.push_back(
            RoleStability{role, acc.first / static_cast<double>(acc.second), acc.second});
    }
    return report;
}

CrossJudgeReport cross_model(const std::vector<DeliberationRecord>& runs,
                             const CoherenceJudge& judge_a, const CoherenceJudge& judge_b,
                             const std::map<std::string, ValuePerspective>& perspectives) {
    if (runs.empty()) throw ConfigError("cross_model: empty run sample");
    if (!same_anchors(judge_a.anchors(), judge_b.anchors())) {
        throw ConfigError("cross_model: judges must share identical calibration anchors");
    }

    CrossJudgeReport report;
    std::vector<double> scores_a, scores_b;
    std::map<std::string, std::pair<double, std::size_t>> means_a, means_b;

    for (const auto& record : runs) {
        const std::uint64_t lane_a = derive_seed(record.run_seed, kCrossLaneA);
        const std::uint64_t lane_b = derive_seed(record.run_seed, kCrossLaneB);
        for (std::size_t i = 0; i < record.evaluations.size(); ++i) {
            const EvaluationRecord& ev = record.evaluations[i];
            ValidationRequest request = build_validation_request(lookup(perspectives, ev),
                                                                 ev.reasoning, judge_a.anchors());
            double a = 0.0, b = 0.0;
            try {
                a = judge_a
                        .score(request, ev.role, lane_a,
                               i * static_cast<std::uint64_t>(judge_a.max_attempts()))
                        .score;
                b = judge_b
                        .score(request, ev.role, lane_b,
                               i * static_cast<std::uint64_t>(judge_b.max_attempts()))
                        .score;
            } catch (const ValidationError&) {
                ++report.excluded;
                continue;
            } catch (const ProviderError&) {
                ++report.excluded;
                continue;
            } catch (const ProtocolError&) {
                ++report.excluded;
                continue;
            }
            scores_a.push_back(a);
            scores_b.push_back(b);
            auto& ma = means_a[ev.perspective];
            ma.first += a;
            ma.second += 1;
            auto& mb = means_b[ev.perspective];
            mb.first += b;
            mb.second += 1;
        }
    }

    report.n = scores_a.size();
    if (report.n < 2) {
        throw DegenerateStatError("cross_model: fewer than two paired scores (n=" +
                                  std::to_string(report.n) + ")");
    }
    report.pearson_r = stats::pearson(scores_a, scores_b);
    report.spearman_rho = stats::spearman(scores_a, scores_b);
    double sum = 0.0, abs_sum = 0.0;
    for (std::size_t i = 0; i < scores_a.size(); ++i) {
        sum += scores_a[i] - scores_b[i];
        abs_sum += std::fabs(scores_a[i] - scores_b[i]);
    }
    report.mean_diff = sum / static_cast<double>(report.n);
    report.mean_abs_diff = abs_sum / static_cast<double>(report.n);
    report.perspective_means_a = sorted_means(means_a);
    report.perspective_means_b = sorted_means(means_b);
    return report;
}

ojson to_json(const ReliabilityReport& r) {
    ojson per_role = ojson::array();
    for (const auto& rs : r.per_role) {
        per_role.push_back(
            ojson{{"role", rs.role}, {"mean_abs_diff", rs.mean_abs_diff}, {"n", rs.n}});
    }
    return ojson{{"icc_3_1", r.icc},
                 {"pearson_r", r.pearson_r},
                 {"spearman_rho", r.spearman_rho},
                 {"mean_abs_diff", r.mean_abs_diff},
                 {"fraction_within_0_2", r.fraction_within_02},
                 {"n", r.n},
                 {"excluded", r.excluded},
                 {"repetitions", r.repetitions},
                 {"per_role", per_role}};
}

ojson to_json(const CrossJudgeReport& r) {
    auto means = [](const std::vector<std::pair<std::string, double>>& v) {
        ojson arr = ojson::array();
        for (const auto& [name, mean] : v) {
            arr.push_back(ojson{{"perspective", name}, {"mean_score", mean}});
        }
        return arr;
    };
    return ojson{{"pearson_r", r.pearson_r},
                 {"spearman_rho", r.spearman_rho},
                 {"mean_diff", r.mean_diff},
                 {"mean_abs_diff", r.mean_abs_diff},
                 {"n", r.n},
                 {"excluded", r.excluded},
                 {"perspective_means_a", means(r.perspective_means_a)},
                 {"perspective_means_b", means(r.perspective_means_b)}};
}

std::string to_markdown(const ReliabilityReport& r) {
    std::ostringstream out;
    out << "# Test-retest reliability\n\n";
    out << "| metric | value |\n|---|---|\n";
    out << "| ICC(3,1) | " << r.icc << " |\n";
    out << "| Pearson r | " << r.pearson_r << " |\n";
    out << "| Spearman rho | " << r.spearman_rho << " |\n";
    out << "| mean abs diff | " << r.mean_abs_diff << " |\n";
    out << "| fraction within +/-0.2 | " << r.fraction_within_02 << " |\n";
    out << "| n | " << r.n << " |\n";
    out << "| excluded | " << r.excluded << " |\n";
    out << "\n## Per-role stability\n\n| role | mean abs diff | n |\n|---|---|---|\n";
    for (const auto& rs : r.per_role) {
        out << "| " << rs.role << " | " << rs.mean_abs_diff << " | " << rs.n << " |\n";
    }
    return out.str();
}

std::string to_markdown(const CrossJudgeReport& r) {
    std::ostringstream out;
    out << "# Cross-model judge agreement\n\n";
    out << "| metric | value |\n|---|---|\n";
    out << "| Pearson r | " << r.pearson_r << " |\n";
    out << "| Spearman rho | " << r.spearman_rho << " |\n";
    out << "| mean diff (a-b) | " << r.mean_diff << " |\n";
    out << "| mean abs diff | " << r.mean_abs_diff << " |\n";
    out << "| n | " << r.n << " |\n";
    out << "| excluded | " << r.excluded << " |\n";
    auto table = [&](const char* title, const std::vector<std::pair<std::string, double>>& v) {
        out << "\n## " << title << "\n\n| perspective | mean score |\n|---|---|\n";
        for (const auto& [name, mean] : v) out << "| " << name << " | " << mean << " |\n";
    };
    table("Judge A perspective ranking", r.perspective_means_a);
    table("Judge B perspective ranking", r.perspective_means_b);
    return out.str();
}

} // namespace council
