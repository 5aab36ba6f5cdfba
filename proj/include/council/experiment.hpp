#pragma once

// Three-state experiment: configuration loading, run persistence, the A/B
// runner with state-C derivation, model profiling and role assignment, and
// cross-state analysis with JSON / Markdown / CSV report output.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "council/deliberation.hpp"
#include "council/delphi.hpp"
#include "council/providers.hpp"
#include "council/tension.hpp"
#include "council/types.hpp"

namespace council {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

// One entry of the config's endpoint table. `kind` selects the transport:
//   http          live HTTP backend (base_url + adapter), optionally backed
//                 by `script` when running with --provider-mode scripted
//   scripted      deterministic playback from a script file
//   keyword_judge offline coherence judge scoring keyword overlap
struct EndpointSpec {
    std::string id;
    std::string kind = "http";
    HttpEndpoint http;
    std::string script;    // path relative to the config file
    std::string cache_dir; // optional response cache for live mode
};

struct ExperimentConfig {
    std::uint64_t master_seed = 0;
    std::vector<Scenario> scenarios;
    std::map<std::string, ValuePerspective> perspectives;
    std::vector<AgentRole> roles;
    ModelAssignment state_a; // one base model for every role
    ModelAssignment state_b; // per-role bindings
    int runs_a = 25;
    int runs_b = 35;
    ModelBinding judge;
    std::vector<CalibrationAnchor> anchors;
    PromptTemplateSet templates;
    std::vector<EndpointSpec> endpoints;
    AnalysisConfig analysis;
    int max_parse_attempts = 3;
    std::vector<std::string> profiling_battery;

    // Scenario/council/assignment consistency; state A must bind a single
    // model id across all roles. Throws ConfigError.
    void validate() const;

    // Stable hash of the run-affecting content (scenarios, council,
    // assignments, judge, anchors, templates, analysis constants, seeds).
    // Transport details (endpoint table) are excluded: replaying the same
    // script over a different transport yields identical records.
    std::string config_hash() const;

    const Scenario& find_scenario(const std::string& scenario_id,
                                  const std::string& variant) const;
    std::vector<AgentRole> champions() const;
    std::vector<AgentRole> evaluators() const;
    const ModelAssignment& assignment_for(ExperimentState state) const;
};

// Parses a config document. Scenario entries may be inline objects or paths
// (resolved against base_dir); state assignments may be inline maps, a single
// binding object (applied to every role), or a path to an assignment file.
ExperimentConfig experiment_config_from_json(const ojson& j,
                                             const std::filesystem::path& base_dir);

// Loads the file and applies dotted-path overrides ("runs_a=10",
// "analysis.bootstrap_resamples=500"). Override keys must already exist in
// the document; values parse as JSON, falling back to string.
ExperimentConfig load_experiment_config(const std::filesystem::path& path,
                                        const std::vector<std::string>& overrides = {});

ojson apply_overrides(ojson document, const std::vector<std::string>& overrides);

// Builds providers for every endpoint. mode "live" constructs HTTP transports
// (wrapped in a response cache when cache_dir is set); mode "scripted"
// requires a script for every http endpoint and plays it back instead.
ProviderHub build_hub(const ExperimentConfig& cfg, const std::string& provider_mode,
                      const std::filesystem::path& base_dir);

// ---------------------------------------------------------------------------
// Run store
// ---------------------------------------------------------------------------

// Append-only JSON store: <root>/<scenario>/<variant>/<state>/<run_id>.json.
// Writes are atomic (temp + rename) and never overwrite; one writer per run
// id is the caller's contract.
class RunStore {
  public:
    explicit RunStore(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }

    static std::string run_id(const std::string& scenario_id, const std::string& variant,
                              ExperimentState state, int index);
    // Index encoded in a run id ("...-r7" -> 7); malformed -> DataError.
    static int run_index_of(const std::string& run_id);

    std::filesystem::path path_for(const std::string& scenario_id, const std::string& variant,
                                   ExperimentState state, const std::string& run_id) const;
    bool exists(const std::string& scenario_id, const std::string& variant, ExperimentState state,
                const std::string& run_id) const;
    void save(const DeliberationRecord& record) const;
    DeliberationRecord load(const std::filesystem::path& file) const;
    // All records of one state, sorted by run index.
    std::vector<DeliberationRecord> load_state(const std::string& scenario_id,
                                               const std::string& variant,
                                               ExperimentState state) const;

  private:
    std::filesystem::path root_;
};

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

struct StateRunSummary {
    ExperimentState state = ExperimentState::A;
    int requested = 0;
    int skipped_existing = 0;
    int executed = 0;
    int completed = 0;
    int failed = 0;
    int partial = 0; // state C only: persisted with missing assessments
    std::vector<std::string> run_ids;
};

// Drives deliberations for one scenario and persists every attempt. Runs
// execute serially in index order; per-run seeds derive from the master seed
// through disjoint per-state lanes, so any single run can be re-executed in
// isolation.
class ExperimentRunner {
  public:
    ExperimentRunner(const ExperimentConfig& cfg, ProviderHub& hub, RunStore& store);

    // States A and B only. Existing run ids are skipped (resume).
    StateRunSummary run_state(const std::string& scenario_id, const std::string& variant,
                              ExperimentState state, int n_runs, std::ostream* log = nullptr);

    // Validates every completed state-B record into a paired state-C record.
    StateRunSummary derive_state_c(const std::string& scenario_id, const std::string& variant,
                                   std::ostream* log = nullptr);

    static std::uint64_t run_seed_for(std::uint64_t master_seed, ExperimentState state,
                                      int run_index);

  private:
    const ExperimentConfig& cfg_;
    ProviderHub& hub_;
    RunStore& store_;
    std::string config_hash_;
};

// ---------------------------------------------------------------------------
// Profiling and role assignment
// ---------------------------------------------------------------------------

struct AlignmentMatrix {
    std::vector<std::string> model_ids;
    std::vector<std::string> perspective_names;
    // model id -> perspective -> mean keyword frequency per response word
    std::map<std::string, std::map<std::string, double>> scores;
    std::map<std::string, std::size_t> excluded_prompts; // empty responses
    std::map<std::string, ModelBinding> bindings;

    double score(const std::string& model_id, const std::string& perspective) const;
};

ojson to_json(const AlignmentMatrix& m);
AlignmentMatrix alignment_matrix_from_json(const ojson& j);
std::string to_markdown(const AlignmentMatrix& m);

// Runs every battery prompt against every model; score(m, p) is the mean of
// (word-boundary occurrences of p's keywords) / (response word count) over
// prompts with non-empty responses. A model whose every response is empty is
// a DataError.
AlignmentMatrix profile_models(const std::vector<ModelBinding>& models,
                               const std::map<std::string, ValuePerspective>& perspectives,
                               const std::vector<std::string>& battery, ProviderHub& hub,
                               std::uint64_t seed);

struct RoleAssignmentResult {
    ModelAssignment assignment;
    std::vector<std::string> ties; // "perspective P: m1 == m2, chose m1"
};

// Argmax model per role's primary perspective; exact ties resolve to the
// lexicographically smaller model id and are logged.
RoleAssignmentResult assign_roles(const AlignmentMatrix& matrix,
                                  const std::vector<AgentRole>& roles);

struct ProfilingCorrelationPoint {
    std::string perspective;
    std::string model;
    double profiling_score = 0.0;
    double mean_coherence = 0.0;
};

struct ProfilingCorrelation {
    double pearson_r = 0.0;
    double p_value = 1.0;
    std::vector<ProfilingCorrelationPoint> points;
};

// Pairs each evaluator perspective's profiling score (for its assigned
// model) with its mean coherence across state-C assessments. Needs at least
// three perspectives with both values.
ProfilingCorrelation profiling_coherence_correlation(
    const AlignmentMatrix& matrix, const ModelAssignment& assignment,
    const std::vector<AgentRole>& roles, const std::vector<DeliberationRecord>& c_records);

ojson to_json(const ProfilingCorrelation& c);

// ---------------------------------------------------------------------------
// Analysis
// ---------------------------------------------------------------------------

struct RunMetrics {
    std::string run_id;
    MetricsBundle bundle;
};

struct StateSummary {
    ExperimentState state = ExperimentState::A;
    std::size_t attempted = 0; // records given, including failed
    std::size_t completed = 0; // records entering analysis
    std::size_t failed = 0;
    std::size_t partial = 0; // state C: missing assessments
    double fcc_mean = 0.0;
    double fcc_sd = 0.0;
    double margin_mean = 0.0;
    double margin_sd = 0.0;
    double perspectives_mean = 0.0;
    double perspectives_sd = 0.0;
    std::optional<double> voice_authenticity; // state C
    std::optional<double> mean_coherence;     // state C
    std::map<std::string, std::size_t> winner_counts; // option id or "tie"
    std::vector<RunMetrics> per_run;
};

struct TestRow {
    std::string scenario;
    std::string test;       // "Mann-Whitney" | "Wilcoxon"
    std::string comparison; // "A vs B" | "B vs C"
    std::string metric;     // "FCC" | "Perspectives" | "Margin"
    bool primary = false;   // primary comparison (alpha) vs secondary (Bonferroni)
    std::optional<StatResult> result; // absent when untestable; see note
    std::string note;
};

struct ArchetypeRow {
    std::string perspective;
    std::string most_common_option; // option id, or "" when no data
    std::string most_common_name;
    double consistency = 0.0; // fraction of evaluator-instance votes on the mode
    std::optional<double> mean_coherence;
    std::size_t n_votes = 0;
};

struct AnalysisReport {
    std::string scenario_id;
    std::string variant;
    std::string config_hash;
    StateSummary a;
    StateSummary b;
    StateSummary c;
    std::optional<BootstrapCi> ab_fcc_ci;    // unpaired, A minus B
    std::optional<BootstrapCi> bc_margin_ci; // paired, B minus C
    std::vector<TestRow> tests;              // the five-row stats table
    std::vector<ArchetypeRow> archetypes;    // state-B stability per perspective
    metrics::TensionDistribution tension;    // over state-C records
    std::size_t paired_n = 0;        // B/C pairs entering the Wilcoxon tests
    std::size_t excluded_pairs = 0;  // orphans and partial validations
    std::vector<std::string> gaps;   // explicit holes in a partial report
};

// Cross-state analysis for one scenario+variant. Records with failure
// markers are counted and excluded; C records pair with their parent B
// record by id, never positionally. Missing preconditions (too few runs,
// degenerate samples) produce gap notes instead of errors.
AnalysisReport analyze(const std::vector<DeliberationRecord>& a_records,
                       const std::vector<DeliberationRecord>& b_records,
                       const std::vector<DeliberationRecord>& c_records, const Scenario& scenario,
                       const std::vector<AgentRole>& roles, const AnalysisConfig& cfg);

// ---------------------------------------------------------------------------
// Report output
// ---------------------------------------------------------------------------

ojson to_json(const AnalysisReport& report);
std::string to_markdown(const AnalysisReport& report);

// Writes report.json, report.md, and per-table CSVs (summary, winners,
// tests, archetypes, tension) into out_dir. Multiple reports merge into one
// document with a combined statistical table. Nothing written carries a
// timestamp, so identical inputs give identical bytes.
void write_report_files(const std::vector<AnalysisReport>& reports,
                        const std::filesystem::path& out_dir);

} // namespace council
