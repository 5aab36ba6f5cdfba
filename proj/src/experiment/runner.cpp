#include "council/errors.hpp"
#include "council/experiment.hpp"
#include "council/rng.hpp"

namespace council {

namespace {

// Per-state seed lanes keep A and B run seeds disjoint from each other and
// from the deliberation-internal lanes derived further down.
constexpr std::uint64_t kStateALane = 10;
constexpr std::uint64_t kStateBLane = 11;

void log_line(std::ostream* log, const std::string& line) {
    if (log) *log << line << "\n";
}

} // namespace

ExperimentRunner::ExperimentRunner(const ExperimentConfig& cfg, ProviderHub& hub, RunStore& store)
    : cfg_(cfg), hub_(hub), store_(store), config_hash_(cfg.config_hash()) {
    cfg_.validate();
}

std::uint64_t ExperimentRunner::run_seed_for(std::uint64_t master_seed, ExperimentState state,
                                             int run_index) {
    std::uint64_t lane;
    switch (state) {
        case ExperimentState::A: lane = kStateALane; break;
        case ExperimentState::B: lane = kStateBLane; break;
        default: throw ConfigError("state C runs derive from state B, they are not seeded");
    }
    return derive_seed(derive_seed(master_seed, lane), static_cast<std::uint64_t>(run_index));
}

StateRunSummary ExperimentRunner::run_state(const std::string& scenario_id,
                                            const std::string& variant, ExperimentState state,
                                            int n_runs, std::ostream* log) {
    if (state == ExperimentState::C) {
        throw ConfigError("state C is derived from state B; use derive_state_c");
    }
    if (n_runs < 1) throw ConfigError("n_runs must be at least 1");
    const Scenario& scenario = cfg_.find_scenario(scenario_id, variant);
    const ModelAssignment& assignment = cfg_.assignment_for(state);
    const auto champions = cfg_.champions();
    const auto evaluators = cfg_.evaluators();
    Deliberator deliberator(cfg_.perspectives, cfg_.templates, hub_, cfg_.max_parse_attempts);

    StateRunSummary summary;
    summary.state = state;
    summary.requested = n_runs;
    for (int i = 0; i < n_runs; ++i) {
        std::string id = RunStore::run_id(scenario_id, variant, state, i);
        summary.run_ids.push_back(id);
        if (store_.exists(scenario_id, variant, state, id)) {
            ++summary.skipped_existing;
            log_line(log, id + ": already persisted, skipping");
            continue;
        }
        ++summary.executed;

        DeliberationRecord record;
        record.run_id = id;
        record.scenario_id = scenario_id;
        record.variant = variant;
        record.state = state;
        record.master_seed = cfg_.master_seed;
        record.run_seed = run_seed_for(cfg_.master_seed, state, i);
        record.config_hash = config_hash_;
        record.model_assignment = assignment;
        record.created = utc_timestamp_now();

        DebateOutcome debate =
            deliberator.run_debate(scenario, champions, assignment, record.run_seed, i);
        record.transcript = debate.transcript;
        if (debate.failure) {
            record.status = RunStatus::Failed;
            record.failure = debate.failure;
        } else {
            EvaluationOutcome evaluation = deliberator.run_evaluation(
                scenario, record.transcript, evaluators, assignment, record.run_seed, i);
            record.evaluations = evaluation.evaluations;
            if (evaluation.failure) {
                record.status = RunStatus::Failed;
                record.failure = evaluation.failure;
            } else {
                record.status = RunStatus::Completed;
            }
        }

        store_.save(record);
        if (record.status == RunStatus::Completed) {
            ++summary.completed;
            log_line(log, id + ": completed");
        } else {
            ++summary.failed;
            log_line(log, id + ": failed at " + record.failure->stage + " (" +
                              record.failure->message + ")");
        }
    }
    return summary;
}

StateRunSummary ExperimentRunner::derive_state_c(const std::string& scenario_id,
                                                 const std::string& variant, std::ostream* log) {
    auto b_records = store_.load_state(scenario_id, variant, ExperimentState::B);
    if (b_records.empty()) {
        throw DataError("no state-B records for " + scenario_id + "/" + variant);
    }
    CoherenceJudge judge(cfg_.judge, cfg_.anchors, hub_, cfg_.max_parse_attempts);

    StateRunSummary summary;
    summary.state = ExperimentState::C;
    for (const auto& b : b_records) {
        if (b.status != RunStatus::Completed) {
            log_line(log, b.run_id + ": failed record, not validatable");
            continue;
        }
        ++summary.requested;
        int index = RunStore::run_index_of(b.run_id);
        std::string id = RunStore::run_id(scenario_id, variant, ExperimentState::C, index);
        summary.run_ids.push_back(id);
        if (store_.exists(scenario_id, variant, ExperimentState::C, id)) {
            ++summary.skipped_existing;
            log_line(log, id + ": already persisted, skipping");
            continue;
        }
        ++summary.executed;
        DeliberationRecord c = validate_run(b, judge, cfg_.perspectives, id, index);
        store_.save(c);
        if (c.status == RunStatus::PartialValidation) {
            ++summary.partial;
            log_line(log, id + ": partial validation (" + c.failure->message + ")");
        } else {
            ++summary.completed;
            log_line(log, id + ": validated");
        }
    }
    return summary;
}

} // namespace council
