#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace council {

// ---------------------------------------------------------------------------
// Scenario material
// ---------------------------------------------------------------------------

struct PolicyOption {
    std::string id;          // short token, e.g. "A"
    std::string name;        // display name, e.g. "Rent Control"
    std::string description; // prose shown to agents
};

struct Scenario {
    std::string id;
    std::string question;
    std::vector<PolicyOption> options; // ordered, length K >= 2
    std::string variant = "baseline";  // e.g. "baseline" | "rebalanced"

    std::size_t option_count() const { return options.size(); }
    const PolicyOption* find_option(const std::string& option_id) const;
    void validate() const; // throws ConfigError on invariant violation
};

// ---------------------------------------------------------------------------
// Agents
// ---------------------------------------------------------------------------

struct ValuePerspective {
    std::string name;
    std::string definition;            // used verbatim in prompts and judge requests
    std::vector<std::string> keywords; // lowercase profiling terms, may be empty
};

enum class RoleKind { Champion, Evaluator };

struct AgentRole {
    std::string name; // e.g. "Conservative"
    std::map<std::string, double> trait_weights; // perspective name -> [0,1]
    std::string primary_perspective;             // resolved, see resolve_primary_perspective
    std::optional<std::string> secondary_perspective;
    RoleKind kind = RoleKind::Evaluator;
    std::optional<std::string> champion_option_id; // present iff kind == Champion
};

// Highest-weighted trait wins; exact ties are broken by the explicit ordered
// tie_break list (earlier entry wins). A tie between perspectives missing
// from tie_break is a configuration error.
std::string resolve_primary_perspective(const std::map<std::string, double>& trait_weights,
                                        const std::vector<std::string>& tie_break);

// Second-highest trait under the same tie-break rule; nullopt when the role
// has a single positive trait.
std::optional<std::string> resolve_secondary_perspective(
    const std::map<std::string, double>& trait_weights,
    const std::vector<std::string>& tie_break);

struct ModelBinding {
    std::string model;       // model identifier sent to the backend
    std::string endpoint;    // endpoint table key
    double temperature = 0.7;
    std::string seed_policy = "derived"; // "derived" | "fixed:<n>" | "none"
};

// role name -> binding; one entry per council role (champions that share an
// evaluator's role name share its binding, as in the fixed pairing design).
using ModelAssignment = std::map<std::string, ModelBinding>;

// ---------------------------------------------------------------------------
// Deliberation output
// ---------------------------------------------------------------------------

enum class DebatePhase { Position, Critique, Defense };

struct TranscriptEntry {
    std::string role;
    int round = 0; // 1 = positions, 2 = critiques, 3 = defenses
    DebatePhase kind = DebatePhase::Position;
    std::string target_option; // critiqued option for round 2, own option otherwise
    std::string text;
};

struct DebateTranscript {
    std::vector<TranscriptEntry> entries;
};

struct Ranking {
    std::vector<std::string> option_ids; // first choice down to last, length K

    const std::string& first_choice() const { return option_ids.front(); }
    // Position of an option in this ranking: 0 = first choice. Throws
    // DataError when the option is absent.
    std::size_t position_of(const std::string& option_id) const;
    // Throws DataError unless this is an exact permutation of the scenario's
    // option ids.
    void validate_against(const std::vector<PolicyOption>& options) const;
};

struct EvaluationRecord {
    std::string role;
    std::string perspective;
    Ranking ranking;
    std::string reasoning;
    std::string raw_response;
    int parse_attempts = 1;
};

struct CoherenceAssessment {
    std::string role;
    double score = 0.0; // in [0, 1]
    std::string judge;  // judge identifier (endpoint/model)
    std::string raw_response;
    std::string request_fingerprint; // hash of the exact validation request
};

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

enum class ExperimentState { A, B, C };

std::string to_string(ExperimentState s);
ExperimentState state_from_string(const std::string& s);

enum class RunStatus { Completed, Failed, PartialValidation };

struct RunFailure {
    std::string stage; // "debate" | "evaluation" | "validation"
    std::string message;
};

struct DeliberationRecord {
    std::string run_id;
    std::string scenario_id;
    std::string variant;
    ExperimentState state = ExperimentState::A;
    std::optional<std::string> parent_run_id; // set for state C, names the B run
    std::uint64_t master_seed = 0;
    std::uint64_t run_seed = 0;
    std::string config_hash;
    RunStatus status = RunStatus::Completed;
    std::optional<RunFailure> failure;
    ModelAssignment model_assignment;
    DebateTranscript transcript;
    std::vector<EvaluationRecord> evaluations;
    std::optional<std::vector<CoherenceAssessment>> assessments;
    std::string created; // ISO-8601 UTC; excluded from replay comparisons

    bool completed() const { return status == RunStatus::Completed; }
};

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

enum class WeightingMode { Unweighted, CoherenceWeighted };

struct MetricsBundle {
    std::map<std::string, double> first_choice_tallies; // option id -> votes (weighted: sum of c)
    double fcc = 0.0;
    std::map<std::string, double> borda_scores;
    double borda_margin = 0.0;
    double effective_perspectives = 0.0; // Shannon entropy, bits
    std::string winner;                  // option id, or "tie" on an exact Borda tie
    WeightingMode weighting = WeightingMode::Unweighted;
    std::optional<double> voice_authenticity; // weighted mode only
};

inline constexpr const char* kTieWinner = "tie";

struct EffectBands {
    double small_r = 0.1;
    double medium_r = 0.3;
    double large_r = 0.5;
};

struct AnalysisConfig {
    double alpha = 0.05;
    double bonferroni_alpha = 0.0125;
    int bootstrap_resamples = 10000;
    double coherence_threshold = 0.6;
    std::vector<double> borda_points = {2.0, 1.0, 0.0}; // strictly decreasing, non-negative
    EffectBands effect_bands;
    std::string stat_method = "auto"; // auto | exact | approx
    std::uint64_t seed = 0;

    void validate(std::size_t option_count) const; // throws ConfigError
};

// ---------------------------------------------------------------------------
// Statistics results
// ---------------------------------------------------------------------------

struct BootstrapCi {
    double lo = 0.0;
    double hi = 0.0;
    int resamples = 0;
    std::uint64_t seed = 0;
};

struct StatResult {
    std::string test;        // "mann_whitney_u" | "wilcoxon_signed_rank"
    double statistic = 0.0;  // U for the first sample / W+ of the differences
    double p_value = 0.0;    // one-tailed, per `alternative`
    std::string alternative; // "greater" | "less" (first sample vs second / differences vs 0)
    std::string method;      // "exact_enumeration" | "normal_approximation"
    double rank_biserial = 0.0;
    std::string effect_band; // "negligible" | "small" | "medium" | "large"
    std::optional<BootstrapCi> ci;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    std::size_t zeros_dropped = 0; // Wilcoxon only
    bool significant_primary = false;
    bool significant_bonferroni = false;
};

} // namespace council
