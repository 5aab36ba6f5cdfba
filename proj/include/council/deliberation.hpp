#pragma once

// Phase 1 (three-round structured debate) and Phase 2 (isolated independent
// evaluation). Champions argue one option each across positions, critiques,
// and defenses; evaluators then read the complete transcript and rank the
// options, each strictly from its own value perspective. Requests for round r
// carry material from rounds < r only, and no evaluator request ever contains
// another evaluator's output.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "council/providers.hpp"
#include "council/types.hpp"

namespace council {

// ---------------------------------------------------------------------------
// Templates
// ---------------------------------------------------------------------------

// Fills {placeholder} slots from `values`. "{{" and "}}" escape literal
// braces. A placeholder with no value is a ConfigError (the template asks for
// material the caller does not supply).
std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& values);

// Placeholder names referenced by a template, in order of first appearance.
std::vector<std::string> template_placeholders(const std::string& tmpl);

// The five prompt bodies the orchestrator renders. Each slot has a fixed
// placeholder vocabulary; validate() rejects templates that reference names
// outside it or omit the material-bearing ones (question, definition, the
// prior-round text, the output format). The set's content hash folds into the
// run config hash so transcripts are traceable to exact wording.
struct PromptTemplateSet {
    std::string position;     // champion states the case for its own option
    std::string critique;     // champion critiques one rival option
    std::string defense;      // champion answers the critiques of its option
    std::string evaluation;   // evaluator ranks all options
    std::string retry_suffix; // appended to the evaluator prompt after a parse failure

    static PromptTemplateSet builtin();
    // Reads position.txt, critique.txt, defense.txt, evaluation.txt,
    // retry_suffix.txt from `dir`; missing file -> ConfigError.
    static PromptTemplateSet from_dir(const std::filesystem::path& dir);

    void validate() const;           // throws ConfigError
    std::string content_hash() const;
};

// ---------------------------------------------------------------------------
// Ranking format
// ---------------------------------------------------------------------------

// Ordinal line labels, FIRST through TENTH. Scenarios with more options than
// labels are rejected.
const std::vector<std::string>& ordinal_labels();

struct ParsedRanking {
    Ranking ranking;
    std::string reasoning;
};

// Extracts the structured block
//   FIRST: <option>  SECOND: <option> ... REASONING: <prose>
// from free text. Labels are matched case-insensitively at line starts;
// option values resolve case-insensitively against option ids and full
// names. Missing line, duplicate option, or unknown option -> ParseError.
// Everything after the REASONING label (including later lines) is the
// reasoning prose.
ParsedRanking parse_ranking(const std::string& text, const std::vector<PolicyOption>& options);

// Inverse of parse_ranking for well-formed inputs; used by scripted fixtures.
std::string render_ranking(const Ranking& ranking, const std::string& reasoning);

// The format instructions interpolated into evaluator prompts, e.g.
// "FIRST: <option id or name>\n...\nREASONING: <...>" sized to the scenario.
std::string ranking_format_block(const std::vector<PolicyOption>& options);

// ---------------------------------------------------------------------------
// Prompt material
// ---------------------------------------------------------------------------

// "A. Rent Control\n   <description>" list for prompt interpolation.
std::string render_options_block(const Scenario& scenario);

// Human-readable transcript with round headers and speaker attribution;
// interpolated verbatim into evaluator prompts.
std::string render_transcript_block(const Scenario& scenario, const DebateTranscript& transcript);

// Per-call seed under a binding's seed policy: "derived" walks
// derive_seed(run_seed, call_sequence), "fixed:<n>" always returns n,
// "none" disables seeding. Unknown policy -> ConfigError.
std::optional<std::uint64_t> resolve_seed(const ModelBinding& binding, std::uint64_t run_seed,
                                          std::uint64_t call_sequence);

// ---------------------------------------------------------------------------
// Orchestration
// ---------------------------------------------------------------------------

struct DebateOutcome {
    DebateTranscript transcript;           // partial when failure is set
    std::optional<RunFailure> failure;
};

struct EvaluationOutcome {
    std::vector<EvaluationRecord> evaluations; // records completed before any failure
    std::optional<RunFailure> failure;
};

class Deliberator {
  public:
    Deliberator(std::map<std::string, ValuePerspective> perspectives, PromptTemplateSet templates,
                ProviderHub& hub, int max_parse_attempts = 3);

    // Rounds run in order: K positions, K*(K-1) critiques, K defenses.
    // Requires exactly one champion per scenario option. Transport failures
    // abort the debate and come back as a partial transcript with a failure
    // marker; configuration problems throw.
    DebateOutcome run_debate(const Scenario& scenario, const std::vector<AgentRole>& champions,
                             const ModelAssignment& assignment, std::uint64_t run_seed,
                             int run_index) const;

    // One evaluation per evaluator, each request carrying the full transcript
    // and only that evaluator's perspective. Responses that stay unparseable
    // after max_parse_attempts fail the run with the raw text preserved.
    EvaluationOutcome run_evaluation(const Scenario& scenario, const DebateTranscript& transcript,
                                     const std::vector<AgentRole>& evaluators,
                                     const ModelAssignment& assignment, std::uint64_t run_seed,
                                     int run_index) const;

    const PromptTemplateSet& templates() const { return templates_; }

  private:
    const ValuePerspective& perspective_of(const AgentRole& role) const;
    const ModelBinding& binding_of(const AgentRole& role, const ModelAssignment& assignment) const;
    GenerationRequest base_request(const AgentRole& role, const ModelBinding& binding,
                                   std::uint64_t run_seed, std::uint64_t call_sequence) const;

    std::map<std::string, ValuePerspective> perspectives_;
    PromptTemplateSet templates_;
    ProviderHub* hub_;
    int max_parse_attempts_;
};

// Expected entry count for a completed debate over K options.
std::size_t expected_transcript_entries(std::size_t option_count);

} // namespace council
