// council: drive three-state deliberation experiments from a config file.
// Subcommands cover execution (run), coherence validation (validate),
// cross-state analysis (analyze), model profiling (profile), and judge
// reliability protocols (retest, crossjudge).
//
// Exit codes: 0 success, 2 configuration or usage fault, 3 provider fault,
// 4 data fault (including runs that failed to complete).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "council/delphi.hpp"
#include "council/errors.hpp"
#include "council/experiment.hpp"
#include "council/json_io.hpp"
#include "council/rng.hpp"

namespace fs = std::filesystem;
using namespace council;

namespace {

constexpr std::uint64_t kProfilingLane = 12;

struct CommonOpts {
    std::string config;
    std::vector<std::string> overrides;
    std::string provider_mode = "scripted";
    std::string runs_dir; // default: <config dir>/runs
    std::string out_dir;  // default: <config dir>/reports
    std::string scenario; // empty: every scenario in the config
    std::string variant = "baseline";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("-c,--config", o.config, "Experiment config file (JSON)")->required();
    cmd->add_option("--set", o.overrides,
                    "Override a config key (key=value, dotted paths allowed; repeatable)");
    cmd->add_option("--provider-mode", o.provider_mode,
                    "Endpoint transport: live or scripted")
        ->check(CLI::IsMember({"live", "scripted"}));
}

void add_scenario(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--scenario", o.scenario, "Scenario id (default: every scenario)");
    cmd->add_option("--variant", o.variant, "Scenario variant");
}

void add_runs_dir(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--runs-dir", o.runs_dir, "Run store root (default: <config dir>/runs)");
}

void add_out_dir(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("-o,--out", o.out_dir, "Report directory (default: <config dir>/reports)");
}

struct Loaded {
    ExperimentConfig cfg;
    fs::path base_dir;
    fs::path runs_dir;
    fs::path out_dir;
};

Loaded load(const CommonOpts& o) {
    fs::path path = fs::absolute(o.config).lexically_normal();
    if (!fs::exists(path)) {
        throw ConfigError("config file '" + o.config + "' does not exist");
    }
    Loaded l;
    l.cfg = load_experiment_config(path, o.overrides);
    l.base_dir = path.parent_path();
    l.runs_dir = o.runs_dir.empty() ? l.base_dir / "runs" : fs::path(o.runs_dir);
    l.out_dir = o.out_dir.empty() ? l.base_dir / "reports" : fs::path(o.out_dir);
    return l;
}

// Scenario/variant pairs a command operates on.
std::vector<std::pair<std::string, std::string>> select_scenarios(const ExperimentConfig& cfg,
                                                                  const CommonOpts& o) {
    std::vector<std::pair<std::string, std::string>> out;
    if (o.scenario.empty()) {
        for (const auto& s : cfg.scenarios) out.emplace_back(s.id, s.variant);
    } else {
        cfg.find_scenario(o.scenario, o.variant); // throws when unknown
        out.emplace_back(o.scenario, o.variant);
    }
    return out;
}

void write_text(const fs::path& path, const std::string& content) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
}

// "model" or "model@endpoint"; endpoint defaults to the config judge's.
ModelBinding parse_judge_spec(const std::string& spec, const ModelBinding& dflt) {
    if (spec.empty()) return dflt;
    ModelBinding b = dflt;
    auto at = spec.find('@');
    if (at == std::string::npos) {
        b.model = spec;
    } else {
        b.model = spec.substr(0, at);
        b.endpoint = spec.substr(at + 1);
    }
    if (b.model.empty()) throw ConfigError("judge spec '" + spec + "' has no model id");
    return b;
}

// First `sample` completed state-B records, ordered by run index.
std::vector<DeliberationRecord> sample_completed_b(const RunStore& store,
                                                   const std::string& scenario_id,
                                                   const std::string& variant, int sample) {
    std::vector<DeliberationRecord> out;
    for (auto& rec : store.load_state(scenario_id, variant, ExperimentState::B)) {
        if (rec.status != RunStatus::Completed) continue;
        out.push_back(std::move(rec));
        if (static_cast<int>(out.size()) == sample) break;
    }
    if (out.empty()) {
        throw DataError("no completed state-B runs for " + scenario_id + "/" + variant +
                        "; run `council run --state B` first");
    }
    return out;
}

int cmd_run(const CommonOpts& o, const std::string& state_str, int runs) {
    if (state_str == "C") {
        throw ConfigError("state C is derived from state B; use `council validate`");
    }
    ExperimentState state = state_str == "A" ? ExperimentState::A : ExperimentState::B;
    Loaded l = load(o);
    ProviderHub hub = build_hub(l.cfg, o.provider_mode, l.base_dir);
    RunStore store(l.runs_dir);
    ExperimentRunner runner(l.cfg, hub, store);

    int total_failed = 0;
    for (const auto& [scenario_id, variant] : select_scenarios(l.cfg, o)) {
        int n = runs > 0 ? runs : (state == ExperimentState::A ? l.cfg.runs_a : l.cfg.runs_b);
        StateRunSummary s = runner.run_state(scenario_id, variant, state, n, &std::cout);
        std::cout << scenario_id << "/" << variant << " state " << state_str << ": requested "
                  << s.requested << ", executed " << s.executed << ", completed " << s.completed
                  << ", failed " << s.failed << ", skipped " << s.skipped_existing << "\n";
        total_failed += s.failed;
    }
    if (total_failed > 0) {
        std::cerr << total_failed << " run(s) failed; records persisted with failure markers\n";
        return 4;
    }
    return 0;
}

int cmd_validate(const CommonOpts& o) {
    Loaded l = load(o);
    ProviderHub hub = build_hub(l.cfg, o.provider_mode, l.base_dir);
    RunStore store(l.runs_dir);
    ExperimentRunner runner(l.cfg, hub, store);

    for (const auto& [scenario_id, variant] : select_scenarios(l.cfg, o)) {
        StateRunSummary s = runner.derive_state_c(scenario_id, variant, &std::cout);
        std::cout << scenario_id << "/" << variant << " state C: requested " << s.requested
                  << ", executed " << s.executed << ", completed " << s.completed << ", partial "
                  << s.partial << ", skipped " << s.skipped_existing << "\n";
    }
    return 0;
}

int cmd_analyze(const CommonOpts& o) {
    Loaded l = load(o);
    RunStore store(l.runs_dir);

    std::vector<AnalysisReport> reports;
    for (const auto& [scenario_id, variant] : select_scenarios(l.cfg, o)) {
        const Scenario& scenario = l.cfg.find_scenario(scenario_id, variant);
        AnalysisReport report =
            analyze(store.load_state(scenario_id, variant, ExperimentState::A),
                    store.load_state(scenario_id, variant, ExperimentState::B),
                    store.load_state(scenario_id, variant, ExperimentState::C), scenario,
                    l.cfg.roles, l.cfg.analysis);
        std::cout << scenario_id << "/" << variant << ": A " << report.a.completed << "/"
                  << report.a.attempted << ", B " << report.b.completed << "/"
                  << report.b.attempted << ", C " << report.c.completed << "/"
                  << report.c.attempted << " (paired " << report.paired_n << ")";
        for (const auto& row : report.tests) {
            if (row.primary && row.result) {
                std::cout << "; " << row.comparison << " " << row.metric
                          << " p=" << row.result->p_value;
            }
        }
        if (!report.gaps.empty()) std::cout << "; gaps: " << report.gaps.size();
        std::cout << "\n";
        reports.push_back(std::move(report));
    }
    write_report_files(reports, l.out_dir);
    std::cout << "reports written to " << l.out_dir.string() << "\n";
    return 0;
}

int cmd_profile(const CommonOpts& o) {
    Loaded l = load(o);
    ProviderHub hub = build_hub(l.cfg, o.provider_mode, l.base_dir);

    // the model pool: every distinct model bound in either state
    std::vector<ModelBinding> pool;
    std::set<std::string> seen;
    for (const auto* assignment : {&l.cfg.state_a, &l.cfg.state_b}) {
        for (const auto& [role, binding] : *assignment) {
            if (seen.insert(binding.model).second) pool.push_back(binding);
        }
    }

    AlignmentMatrix matrix = profile_models(pool, l.cfg.perspectives, l.cfg.profiling_battery,
                                            hub, derive_seed(l.cfg.master_seed, kProfilingLane));
    RoleAssignmentResult assignment = assign_roles(matrix, l.cfg.roles);

    std::string md = to_markdown(matrix);
    std::cout << md << "\nSuggested assignment:\n";
    for (const auto& [role, binding] : assignment.assignment) {
        std::cout << "  " << role << " -> " << binding.model << "\n";
    }
    for (const auto& tie : assignment.ties) std::cout << "  tie: " << tie << "\n";

    ojson doc;
    doc["matrix"] = to_json(matrix);
    ojson roles = ojson::object();
    for (const auto& [role, binding] : assignment.assignment) roles[role] = to_json(binding);
    doc["assignment"] = std::move(roles);
    doc["ties"] = assignment.ties;
    write_text(l.out_dir / "alignment.json", doc.dump(2) + "\n");
    write_text(l.out_dir / "alignment.md", md);
    std::cout << "alignment written to " << l.out_dir.string() << "\n";
    return 0;
}

int cmd_retest(const CommonOpts& o, int sample, int repetitions) {
    Loaded l = load(o);
    ProviderHub hub = build_hub(l.cfg, o.provider_mode, l.base_dir);
    RunStore store(l.runs_dir);
    CoherenceJudge judge(l.cfg.judge, l.cfg.anchors, hub, l.cfg.max_parse_attempts);

    auto scenarios = select_scenarios(l.cfg, o);
    std::vector<DeliberationRecord> runs;
    for (const auto& [scenario_id, variant] : scenarios) {
        for (auto& rec : sample_completed_b(store, scenario_id, variant, sample)) {
            runs.push_back(std::move(rec));
        }
    }
    ReliabilityReport report = test_retest(runs, judge, l.cfg.perspectives, repetitions);
    std::string md = to_markdown(report);
    std::cout << md;
    write_text(l.out_dir / "retest.json", to_json(report).dump(2) + "\n");
    write_text(l.out_dir / "retest.md", md);
    std::cout << "retest report written to " << l.out_dir.string() << "\n";
    return 0;
}

int cmd_crossjudge(const CommonOpts& o, const std::string& judge_a_spec,
                   const std::string& judge_b_spec, int sample) {
    Loaded l = load(o);
    ProviderHub hub = build_hub(l.cfg, o.provider_mode, l.base_dir);
    RunStore store(l.runs_dir);
    ModelBinding binding_a = parse_judge_spec(judge_a_spec, l.cfg.judge);
    ModelBinding binding_b = parse_judge_spec(judge_b_spec, l.cfg.judge);
    if (binding_a.model == binding_b.model && binding_a.endpoint == binding_b.endpoint) {
        throw ConfigError("cross-judge comparison needs two distinct judges");
    }
    CoherenceJudge judge_a(binding_a, l.cfg.anchors, hub, l.cfg.max_parse_attempts);
    CoherenceJudge judge_b(binding_b, l.cfg.anchors, hub, l.cfg.max_parse_attempts);

    std::vector<DeliberationRecord> runs;
    for (const auto& [scenario_id, variant] : select_scenarios(l.cfg, o)) {
        for (auto& rec : sample_completed_b(store, scenario_id, variant, sample)) {
            runs.push_back(std::move(rec));
        }
    }
    CrossJudgeReport report = cross_model(runs, judge_a, judge_b, l.cfg.perspectives);
    std::string md = to_markdown(report);
    std::cout << md;
    write_text(l.out_dir / "crossjudge.json", to_json(report).dump(2) + "\n");
    write_text(l.out_dir / "crossjudge.md", md);
    std::cout << "cross-judge report written to " << l.out_dir.string() << "\n";
    return 0;
}

int exit_code_for(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::Config: return 2;
        case ErrorKind::Provider:
        case ErrorKind::Protocol: return 3;
        default: return 4;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-agent policy deliberation experiments"};
    app.require_subcommand(1);

    CommonOpts run_o, validate_o, analyze_o, profile_o, retest_o, cross_o;
    std::string run_state_str;
    int run_count = 0;
    int retest_sample = 10, retest_reps = 2;
    int cross_sample = 10;
    std::string judge_a_spec, judge_b_spec;

    CLI::App* run_cmd = app.add_subcommand("run", "Execute deliberation runs for one state");
    add_common(run_cmd, run_o);
    add_scenario(run_cmd, run_o);
    add_runs_dir(run_cmd, run_o);
    run_cmd->add_option("--state", run_state_str, "Experiment state: A or B (C is derived)")
        ->required()
        ->check(CLI::IsMember({"A", "B", "C"}));
    run_cmd->add_option("--runs", run_count, "Run count (default: runs_a/runs_b from config)");

    CLI::App* validate_cmd =
        app.add_subcommand("validate", "Derive state C by coherence-judging state-B runs");
    add_common(validate_cmd, validate_o);
    add_scenario(validate_cmd, validate_o);
    add_runs_dir(validate_cmd, validate_o);

    CLI::App* analyze_cmd =
        app.add_subcommand("analyze", "Cross-state analysis; writes JSON/Markdown/CSV reports");
    add_common(analyze_cmd, analyze_o);
    add_scenario(analyze_cmd, analyze_o);
    add_runs_dir(analyze_cmd, analyze_o);
    add_out_dir(analyze_cmd, analyze_o);

    CLI::App* profile_cmd = app.add_subcommand(
        "profile", "Profile the model pool against perspective keywords; suggest assignments");
    add_common(profile_cmd, profile_o);
    add_out_dir(profile_cmd, profile_o);

    CLI::App* retest_cmd =
        app.add_subcommand("retest", "Test-retest reliability of the coherence judge");
    add_common(retest_cmd, retest_o);
    add_scenario(retest_cmd, retest_o);
    add_runs_dir(retest_cmd, retest_o);
    add_out_dir(retest_cmd, retest_o);
    retest_cmd->add_option("--sample", retest_sample, "State-B runs to sample per scenario")
        ->check(CLI::PositiveNumber);
    retest_cmd->add_option("--repetitions", retest_reps, "Scoring repetitions per assessment")
        ->check(CLI::Range(2, 100));

    CLI::App* cross_cmd =
        app.add_subcommand("crossjudge", "Compare two coherence judges on the same runs");
    add_common(cross_cmd, cross_o);
    add_scenario(cross_cmd, cross_o);
    add_runs_dir(cross_cmd, cross_o);
    add_out_dir(cross_cmd, cross_o);
    cross_cmd->add_option("--judge-a", judge_a_spec,
                          "First judge, model[@endpoint] (default: config judge)");
    cross_cmd->add_option("--judge-b", judge_b_spec, "Second judge, model[@endpoint]")
        ->required();
    cross_cmd->add_option("--sample", cross_sample, "State-B runs to sample per scenario")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (run_cmd->parsed()) return cmd_run(run_o, run_state_str, run_count);
        if (validate_cmd->parsed()) return cmd_validate(validate_o);
        if (analyze_cmd->parsed()) return cmd_analyze(analyze_o);
        if (profile_cmd->parsed()) return cmd_profile(profile_o);
        if (retest_cmd->parsed()) return cmd_retest(retest_o, retest_sample, retest_reps);
        if (cross_cmd->parsed()) return cmd_crossjudge(cross_o, judge_a_spec, judge_b_spec,
                                                       cross_sample);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
