#pragma once

// Phase 3 coherence validation plus the reliability protocols built on it.
// A frontier-model judge receives a strictly restricted request: perspective
// name, perspective definition, the evaluator's reasoning text, and fixed
// calibration anchors. Nothing else can reach it; the request builder's
// signature admits no votes, no option material, no transcript, and no other
// evaluator's output.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "council/json_io.hpp"
#include "council/providers.hpp"
#include "council/types.hpp"

namespace council {

// ---------------------------------------------------------------------------
// Validation requests
// ---------------------------------------------------------------------------

struct CalibrationAnchor {
    std::string snippet; // example reasoning
    double score = 0.0;  // coherence the judge should assign it
};

// Three fixed anchors (incoherent / partially grounded / strongly grounded).
// Anchors are part of judge configuration and hash into the config so scores
// stay comparable across runs.
std::vector<CalibrationAnchor> default_calibration_anchors();

ojson to_json(const std::vector<CalibrationAnchor>& anchors);
std::vector<CalibrationAnchor> anchors_from_json(const ojson& j);

struct ValidationRequest {
    std::string perspective_name;
    std::string perspective_definition;
    std::string reasoning;
    std::vector<CalibrationAnchor> anchors;
    std::string text;        // fully rendered judge prompt
    std::string fingerprint; // content hash of text
};

// The only constructor of judge input. Interpolates exactly the permitted
// items; the signature is the isolation guarantee.
ValidationRequest build_validation_request(const ValuePerspective& perspective,
                                           const std::string& reasoning,
                                           const std::vector<CalibrationAnchor>& anchors);

// The request text fields, recovered from the rendered prompt. Deterministic
// stub judges (and audits) parse requests with this instead of ad-hoc string
// surgery.
struct ParsedValidationRequest {
    std::string perspective_name;
    std::string definition;
    std::string reasoning;
};
ParsedValidationRequest parse_validation_request_text(const std::string& text);

// First "SCORE: <decimal>" line of a judge reply. Missing line or a value
// outside [0,1] -> ValidationError; values are never clamped.
double parse_score_line(const std::string& text);

// ---------------------------------------------------------------------------
// Judging
// ---------------------------------------------------------------------------

class CoherenceJudge {
  public:
    CoherenceJudge(ModelBinding binding, std::vector<CalibrationAnchor> anchors, ProviderHub& hub,
                   int max_attempts = 3);

    // Sends the request, parses the score, retries a missing/out-of-range
    // score with a format reminder up to max_attempts, then fails with
    // ValidationError. seed_lane/call_base keep per-attempt seeds disjoint
    // across evaluators and repetitions.
    CoherenceAssessment score(const ValidationRequest& request, const std::string& role,
                              std::uint64_t seed_lane, std::uint64_t call_base,
                              int run_index = -1) const;

    const std::vector<CalibrationAnchor>& anchors() const { return anchors_; }
    const ModelBinding& binding() const { return binding_; }
    int max_attempts() const { return max_attempts_; }
    std::string judge_id() const { return binding_.endpoint + "/" + binding_.model; }

  private:
    ModelBinding binding_;
    std::vector<CalibrationAnchor> anchors_;
    ProviderHub* hub_;
    int max_attempts_;
};

// Scores every evaluation of a completed state-B run and returns the state-C
// record: identical transcript and evaluations, assessments attached, parent
// run id set. Per-evaluator judge failures downgrade the record to
// partial-validation instead of aborting the rest.
DeliberationRecord validate_run(const DeliberationRecord& record, const CoherenceJudge& judge,
                                const std::map<std::string, ValuePerspective>& perspectives,
                                const std::string& new_run_id, int run_index = -1);

// ---------------------------------------------------------------------------
// Reliability protocols
// ---------------------------------------------------------------------------

struct RoleStability {
    std::string role;
    double mean_abs_diff = 0.0;
    std::size_t n = 0;
};

struct ReliabilityReport {
    double icc = 0.0;        // ICC(3,1) across repetitions
    double pearson_r = 0.0;  // first vs second scoring
    double spearman_rho = 0.0;
    double mean_abs_diff = 0.0;
    double fraction_within_02 = 0.0; // |delta| <= 0.2
    std::vector<RoleStability> per_role;
    std::size_t n = 0;        // assessment pairs included
    std::size_t excluded = 0; // judge failures, excluded pairwise
    int repetitions = 2;
};

// Scores every evaluator assessment in the sample `repetitions` times with
// independent requests under identical conditions.
ReliabilityReport test_retest(const std::vector<DeliberationRecord>& runs,
                              const CoherenceJudge& judge,
                              const std::map<std::string, ValuePerspective>& perspectives,
                              int repetitions = 2);

struct CrossJudgeReport {
    double pearson_r = 0.0;
    double spearman_rho = 0.0;
    double mean_diff = 0.0; // mean (judge_a - judge_b)
    double mean_abs_diff = 0.0;
    std::size_t n = 0;
    std::size_t excluded = 0;
    // per-perspective mean scores, descending, one ranking per judge
    std::vector<std::pair<std::string, double>> perspective_means_a;
    std::vector<std::pair<std::string, double>> perspective_means_b;
};

// Both judges score identical requests (same prompt, same anchors).
CrossJudgeReport cross_model(const std::vector<DeliberationRecord>& runs,
                             const CoherenceJudge& judge_a, const CoherenceJudge& judge_b,
                             const std::map<std::string, ValuePerspective>& perspectives);

ojson to_json(const ReliabilityReport& r);
ojson to_json(const CrossJudgeReport& r);
std::string to_markdown(const ReliabilityReport& r);
std::string to_markdown(const CrossJudgeReport& r);

// ---------------------------------------------------------------------------
// Deterministic stub judge
// ---------------------------------------------------------------------------

// Fraction of the perspective's keywords present in the reasoning
// (case-insensitive, word boundaries, each keyword counted once).
double keyword_overlap_score(const ValuePerspective& perspective, const std::string& reasoning);

// Offline coherence judge: parses the validation request it receives,
// computes the keyword overlap for the named perspective, and replies
// "SCORE: <value>". Pure function of its input; enables fully scripted
// acceptance of weighted scoring.
class KeywordJudgeProvider : public Provider {
  public:
    explicit KeywordJudgeProvider(std::map<std::string, ValuePerspective> perspectives,
                                  std::string id = "keyword_judge");

  protected:
    GenerationResponse do_generate(const GenerationRequest& request,
                                   const CallSite& site) override;

  private:
    std::map<std::string, ValuePerspective> perspectives_;
};

} // namespace council
