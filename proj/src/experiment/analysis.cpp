#include <algorithm>
#include <cmath>

#include "council/errors.hpp"
#include "council/experiment.hpp"
#include "council/metrics.hpp"
#include "council/rng.hpp"
#include "council/stats.hpp"

namespace council {

namespace {

// Bootstrap seed lanes, disjoint from the runner's per-state lanes.
constexpr std::uint64_t kAbCiLane = 20;
constexpr std::uint64_t kBcCiLane = 21;

double mean_of(const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::vector<double> column(const std::vector<RunMetrics>& runs, double MetricsBundle::*field) {
    std::vector<double> out;
    out.reserve(runs.size());
    for (const auto& r : runs) out.push_back(r.bundle.*field);
    return out;
}

StateSummary summarize(const std::vector<DeliberationRecord>& records, ExperimentState state,
                       const Scenario& scenario, const AnalysisConfig& cfg, WeightingMode mode) {
    StateSummary s;
    s.state = state;
    s.attempted = records.size();
    double coherence_sum = 0.0;
    std::size_t coherence_n = 0;
    std::vector<double> authenticity;
    for (const auto& record : records) {
        if (record.status == RunStatus::Failed) {
            ++s.failed;
            continue;
        }
        if (record.status == RunStatus::PartialValidation) {
            ++s.partial;
            continue;
        }
        ++s.completed;
        RunMetrics rm;
        rm.run_id = record.run_id;
        rm.bundle = metrics::compute_metrics(record, scenario, cfg, mode);
        ++s.winner_counts[rm.bundle.winner];
        if (rm.bundle.voice_authenticity) authenticity.push_back(*rm.bundle.voice_authenticity);
        if (record.assessments) {
            for (const auto& a : *record.assessments) {
                coherence_sum += a.score;
                ++coherence_n;
            }
        }
        s.per_run.push_back(std::move(rm));
    }
    auto fcc = column(s.per_run, &MetricsBundle::fcc);
    auto margin = column(s.per_run, &MetricsBundle::borda_margin);
    auto persp = column(s.per_run, &MetricsBundle::effective_perspectives);
    s.fcc_mean = mean_of(fcc);
    s.fcc_sd = sample_sd(fcc);
    s.margin_mean = mean_of(margin);
    s.margin_sd = sample_sd(margin);
    s.perspectives_mean = mean_of(persp);
    s.perspectives_sd = sample_sd(persp);
    if (!authenticity.empty()) s.voice_authenticity = mean_of(authenticity);
    if (coherence_n > 0) s.mean_coherence = coherence_sum / static_cast<double>(coherence_n);
    return s;
}

TestRow make_row(const std::string& scenario, const std::string& test,
                 const std::string& comparison, const std::string& metric, bool primary) {
    TestRow row;
    row.scenario = scenario;
    row.test = test;
    row.comparison = comparison;
    row.metric = metric;
    row.primary = primary;
    return row;
}

void flag_significance(StatResult& r, const AnalysisConfig& cfg) {
    r.significant_primary = r.p_value < cfg.alpha;
    r.significant_bonferroni = r.p_value < cfg.bonferroni_alpha;
}

} // namespace

AnalysisReport analyze(const std::vector<DeliberationRecord>& a_records,
                       const std::vector<DeliberationRecord>& b_records,
                       const std::vector<DeliberationRecord>& c_records, const Scenario& scenario,
                       const std::vector<AgentRole>& roles, const AnalysisConfig& cfg) {
    cfg.validate(scenario.option_count());
    AnalysisReport report;
    report.scenario_id = scenario.id;
    report.variant = scenario.variant;
    for (const auto* records : {&a_records, &b_records, &c_records}) {
        for (const auto& r : *records) {
            if (report.config_hash.empty()) {
                report.config_hash = r.config_hash;
            } else if (r.config_hash != report.config_hash) {
                report.gaps.push_back("records mix config hashes (" + report.config_hash +
                                      " vs " + r.config_hash + " in " + r.run_id + ")");
                break;
            }
        }
    }

    report.a = summarize(a_records, ExperimentState::A, scenario, cfg, WeightingMode::Unweighted);
    report.b = summarize(b_records, ExperimentState::B, scenario, cfg, WeightingMode::Unweighted);
    report.c = summarize(c_records, ExperimentState::C, scenario, cfg,
                         WeightingMode::CoherenceWeighted);

    // pair C runs with their parent B run, strictly by id
    std::map<std::string, const MetricsBundle*> b_by_id;
    for (const auto& rm : report.b.per_run) b_by_id[rm.run_id] = &rm.bundle;
    std::map<std::string, const DeliberationRecord*> c_by_id;
    for (const auto& r : c_records) c_by_id[r.run_id] = &r;

    std::vector<double> b_fcc_paired, c_fcc_paired, b_margin_paired, c_margin_paired,
        b_persp_paired, c_persp_paired;
    for (const auto& rm : report.c.per_run) {
        const DeliberationRecord& c_record = *c_by_id.at(rm.run_id);
        if (!c_record.parent_run_id) {
            ++report.excluded_pairs;
            report.gaps.push_back("state-C run " + rm.run_id + " has no parent id; unpaired");
            continue;
        }
        auto parent = b_by_id.find(*c_record.parent_run_id);
        if (parent == b_by_id.end()) {
            ++report.excluded_pairs;
            report.gaps.push_back("state-C run " + rm.run_id + " has no completed parent " +
                                  *c_record.parent_run_id + "; unpaired");
            continue;
        }
        b_fcc_paired.push_back(parent->second->fcc);
        c_fcc_paired.push_back(rm.bundle.fcc);
        b_margin_paired.push_back(parent->second->borda_margin);
        c_margin_paired.push_back(rm.bundle.borda_margin);
        b_persp_paired.push_back(parent->second->effective_perspectives);
        c_persp_paired.push_back(rm.bundle.effective_perspectives);
    }
    report.paired_n = b_fcc_paired.size();
    report.excluded_pairs += report.c.partial; // partial validations never got metrics
    if (report.c.partial > 0) {
        report.gaps.push_back(std::to_string(report.c.partial) +
                              " partial validation(s) excluded from paired tests");
    }

    auto a_fcc = column(report.a.per_run, &MetricsBundle::fcc);
    auto b_fcc = column(report.b.per_run, &MetricsBundle::fcc);
    auto a_persp = column(report.a.per_run, &MetricsBundle::effective_perspectives);
    auto b_persp = column(report.b.per_run, &MetricsBundle::effective_perspectives);

    bool ab_testable = report.a.completed >= 2 && report.b.completed >= 2;
    if (!ab_testable) {
        report.gaps.push_back("A vs B tests need at least 2 completed runs per state (have " +
                              std::to_string(report.a.completed) + " and " +
                              std::to_string(report.b.completed) + ")");
    }
    bool bc_testable = report.paired_n >= 2;
    if (!bc_testable) {
        report.gaps.push_back("B vs C tests need at least 2 pairs (have " +
                              std::to_string(report.paired_n) + ")");
    }

    stats::Method method = stats::Method::Auto;
    if (cfg.stat_method == "exact") method = stats::Method::Exact;
    if (cfg.stat_method == "approx") method = stats::Method::Approx;

    auto run_mw = [&](TestRow row, const std::vector<double>& a, const std::vector<double>& b,
                      const std::string& alternative) {
        if (ab_testable) {
            try {
                StatResult r = stats::mann_whitney_u(a, b, alternative, method,
                                                     stats::Kernel::Parallel, cfg.effect_bands);
                flag_significance(r, cfg);
                row.result = std::move(r);
            } catch (const DegenerateStatError& e) {
                row.note = e.what();
            }
        } else {
            row.note = "insufficient runs";
        }
        report.tests.push_back(std::move(row));
    };
    auto run_wilcoxon = [&](TestRow row, const std::vector<double>& b,
                            const std::vector<double>& c, const std::string& alternative) {
        if (bc_testable) {
            std::vector<double> diffs(b.size());
            for (std::size_t i = 0; i < b.size(); ++i) diffs[i] = b[i] - c[i];
            try {
                StatResult r =
                    stats::wilcoxon_signed_rank(diffs, alternative, method,
                                                stats::Kernel::Parallel, cfg.effect_bands);
                flag_significance(r, cfg);
                row.result = std::move(r);
            } catch (const DegenerateStatError& e) {
                row.note = e.what();
            }
        } else {
            row.note = "insufficient pairs";
        }
        report.tests.push_back(std::move(row));
    };

    if (ab_testable) {
        report.ab_fcc_ci = stats::bootstrap_ci(a_fcc, b_fcc, cfg.bootstrap_resamples, false,
                                               derive_seed(cfg.seed, kAbCiLane));
    }
    if (bc_testable) {
        report.bc_margin_ci =
            stats::bootstrap_ci(b_margin_paired, c_margin_paired, cfg.bootstrap_resamples, true,
                                derive_seed(cfg.seed, kBcCiLane));
    }

    TestRow row = make_row(scenario.id, "Mann-Whitney", "A vs B", "FCC", true);
    run_mw(std::move(row), a_fcc, b_fcc, "greater");
    if (report.tests.back().result && report.ab_fcc_ci) {
        report.tests.back().result->ci = *report.ab_fcc_ci;
    }
    run_mw(make_row(scenario.id, "Mann-Whitney", "A vs B", "Perspectives", false), a_persp,
           b_persp, "less");
    run_wilcoxon(make_row(scenario.id, "Wilcoxon", "B vs C", "Margin", true), b_margin_paired,
                 c_margin_paired, "greater");
    if (report.tests.back().result && report.bc_margin_ci) {
        report.tests.back().result->ci = *report.bc_margin_ci;
    }
    run_wilcoxon(make_row(scenario.id, "Wilcoxon", "B vs C", "FCC", false), b_fcc_paired,
                 c_fcc_paired, "greater");
    run_wilcoxon(make_row(scenario.id, "Wilcoxon", "B vs C", "Perspectives", false),
                 b_persp_paired, c_persp_paired, "less");

    // archetype stability: evaluator-instance first choices across completed
    // state-B runs, pooled per perspective; coherence from state-C assessments
    std::map<std::string, std::vector<const AgentRole*>> evaluators_by_perspective;
    std::map<std::string, std::string> role_perspective;
    for (const auto& role : roles) {
        if (role.kind != RoleKind::Evaluator) continue;
        evaluators_by_perspective[role.primary_perspective].push_back(&role);
        role_perspective[role.name] = role.primary_perspective;
    }
    std::map<std::string, std::map<std::string, std::size_t>> votes; // perspective -> option -> n
    for (const auto& record : b_records) {
        if (record.status != RunStatus::Completed) continue;
        for (const auto& ev : record.evaluations) {
            auto it = role_perspective.find(ev.role);
            if (it == role_perspective.end()) continue;
            ++votes[it->second][ev.ranking.first_choice()];
        }
    }
    std::map<std::string, std::pair<double, std::size_t>> coherence_by_perspective;
    for (const auto& record : c_records) {
        if (!record.assessments) continue;
        for (const auto& a : *record.assessments) {
            auto it = role_perspective.find(a.role);
            if (it == role_perspective.end()) continue;
            auto& [sum, n] = coherence_by_perspective[it->second];
            sum += a.score;
            ++n;
        }
    }
    for (const auto& [perspective, bearers] : evaluators_by_perspective) {
        ArchetypeRow arch;
        arch.perspective = perspective;
        auto v = votes.find(perspective);
        if (v != votes.end()) {
            std::size_t total = 0;
            std::size_t best = 0;
            for (const auto& [option, n] : v->second) {
                total += n;
                if (n > best) { // map order makes ties resolve to the smaller option id
                    best = n;
                    arch.most_common_option = option;
                }
            }
            arch.n_votes = total;
            arch.consistency = static_cast<double>(best) / static_cast<double>(total);
            if (const PolicyOption* opt = scenario.find_option(arch.most_common_option)) {
                arch.most_common_name = opt->name;
            }
        }
        auto coh = coherence_by_perspective.find(perspective);
        if (coh != coherence_by_perspective.end() && coh->second.second > 0) {
            arch.mean_coherence = coh->second.first / static_cast<double>(coh->second.second);
        }
        report.archetypes.push_back(std::move(arch));
    }

    // tension over every state-C record that carries assessments
    std::vector<DeliberationRecord> assessed;
    for (const auto& record : c_records) {
        if (record.assessments) assessed.push_back(record);
    }
    if (!assessed.empty()) {
        report.tension = metrics::tension_rate(assessed, metrics::default_tension_pairs(), roles,
                                               cfg.coherence_threshold);
    } else {
        report.gaps.push_back("no state-C assessments; tension distribution empty");
    }

    return report;
}

} // namespace council
