#pragma once

// Social-choice metrics over a single deliberation: Borda scoring (optionally
// coherence-weighted), first-choice concentration, Borda margin, effective
// perspectives (Shannon entropy of first-choice shares), voice authenticity.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "council/types.hpp"

namespace council::metrics {

// S_i = Σ_e w_e · points[rank of i in e's ranking]; w_e = 1 without weights.
// Every option appears in the result, even at score 0.
std::map<std::string, double> borda_scores(const std::vector<EvaluationRecord>& evaluations,
                                           const std::vector<PolicyOption>& options,
                                           const std::vector<double>& points,
                                           const std::optional<std::vector<double>>& weights =
                                               std::nullopt);

// FCC = (max v_i − N/K) / (N − N/K) with exact rational N/K. The floored
// variant fails to reproduce the published five-value table for N=7, K=3;
// see the regression test. Weighted tallies pass v_i = Σ c_e and N = Σ c_e.
double first_choice_concentration(const std::map<std::string, double>& tallies, double n,
                                  std::size_t k);

// BM = (S_(1) − S_(2)) / (points_max · N).
double borda_margin(const std::map<std::string, double>& scores, double n, double points_max);

// H = −Σ p_i log2 p_i over first-choice shares, 0·log 0 = 0.
double effective_perspectives(const std::vector<double>& shares);

// Fraction of assessments with c >= threshold (boundary inclusive).
double voice_authenticity(const std::vector<CoherenceAssessment>& assessments,
                          double threshold = 0.6);

// Option id with the strictly largest score, or kTieWinner on an exact tie.
std::string winner_of(const std::map<std::string, double>& scores);

// First-choice tallies per option (weighted when weights given); options with
// no votes appear at 0.
std::map<std::string, double> first_choice_tallies(
    const std::vector<EvaluationRecord>& evaluations, const std::vector<PolicyOption>& options,
    const std::optional<std::vector<double>>& weights = std::nullopt);

// Full bundle for one record. CoherenceWeighted mode reads weights from the
// record's assessments (matched by role) and adds voice authenticity.
MetricsBundle compute_metrics(const DeliberationRecord& record, const Scenario& scenario,
                              const AnalysisConfig& cfg, WeightingMode mode);

} // namespace council::metrics
