#include "council/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "council/errors.hpp"

namespace council::metrics {

std::map<std::string, double> borda_scores(const std::vector<EvaluationRecord>& evaluations,
                                           const std::vector<PolicyOption>& options,
                                           const std::vector<double>& points,
                                           const std::optional<std::vector<double>>& weights) {
    if (points.size() != options.size()) {
        throw ConfigError("borda: points length " + std::to_string(points.size()) +
                          " does not match option count " + std::to_string(options.size()));
    }
    if (weights && weights->size() != evaluations.size()) {
        throw DataError("borda: " + std::to_string(weights->size()) + " weights for " +
                        std::to_string(evaluations.size()) + " evaluations");
    }
    std::map<std::string, double> scores;
    for (const auto& opt : options) scores[opt.id] = 0.0;
    for (std::size_t e = 0; e < evaluations.size(); ++e) {
        const Ranking& r = evaluations[e].ranking;
        r.validate_against(options);
        double w = weights ? (*weights)[e] : 1.0;
        for (const auto& opt : options) {
            scores[opt.id] += w * points[r.position_of(opt.id)];
        }
    }
    return scores;
}

double first_choice_concentration(const std::map<std::string, double>& tallies, double n,
                                  std::size_t k) {
    if (tallies.empty() || k < 2) throw ConfigError("fcc: need at least 2 options");
    if (n <= 0.0) throw DegenerateStatError("fcc: zero total weight, metric undefined");
    double max_tally = 0.0;
    double sum = 0.0;
    for (const auto& [id, v] : tallies) {
        max_tally = std::max(max_tally, v);
        sum += v;
    }
    if (std::fabs(sum - n) > 1e-9 * std::max(1.0, n)) {
        throw DataError("fcc: tallies sum to " + std::to_string(sum) + ", expected " +
                        std::to_string(n));
    }
    double expected = n / static_cast<double>(k); // exact rational share, never floored
    return (max_tally - expected) / (n - expected);
}

double borda_margin(const std::map<std::string, double>& scores, double n, double points_max) {
    if (scores.size() < 2) throw ConfigError("borda margin: need at least 2 options");
    if (n <= 0.0 || points_max <= 0.0) {
        throw DegenerateStatError("borda margin: zero normalizer, metric undefined");
    }
    std::vector<double> values;
    for (const auto& [id, s] : scores) values.push_back(s);
    std::sort(values.begin(), values.end(), std::greater<>());
    return (values[0] - values[1]) / (points_max * n);
}

double effective_perspectives(const std::vector<double>& shares) {
    double sum = 0.0;
    for (double p : shares) {
        if (p < 0.0) throw DataError("entropy: negative share");
        sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-9) {
        throw DataError("entropy: shares sum to " + std::to_string(sum));
    }
    double h = 0.0;
    for (double p : shares) {
        if (p > 0.0) h -= p * std::log2(p);
    }
    return h;
}

double voice_authenticity(const std::vector<CoherenceAssessment>& assessments, double threshold) {
    if (assessments.empty()) throw DataError("voice authenticity: no assessments");
    std::size_t hits = 0;
    for (const auto& a : assessments) {
        if (a.score >= threshold) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(assessments.size());
}

std::string winner_of(const std::map<std::string, double>& scores) {
    std::string best;
    double top = -std::numeric_limits<double>::infinity();
    bool tied = false;
    for (const auto& [id, s] : scores) {
        if (s > top) {
            top = s;
            best = id;
            tied = false;
        } else if (s == top) {
            tied = true;
        }
    }
    return tied ? std::string(kTieWinner) : best;
}

std::map<std::string, double> first_choice_tallies(
    const std::vector<EvaluationRecord>& evaluations, const std::vector<PolicyOption>& options,
    const std::optional<std::vector<double>>& weights) {
    if (weights && weights->size() != evaluations.size()) {
        throw DataError("tallies: weight count mismatch");
    }
    std::map<std::string, double> tallies;
    for (const auto& opt : options) tallies[opt.id] = 0.0;
    for (std::size_t e = 0; e < evaluations.size(); ++e) {
        const std::string& first = evaluations[e].ranking.first_choice();
        auto it = tallies.find(first);
        if (it == tallies.end()) throw DataError("tallies: unknown first choice '" + first + "'");
        it->second += weights ? (*weights)[e] : 1.0;
    }
    return tallies;
}

MetricsBundle compute_metrics(const DeliberationRecord& record, const Scenario& scenario,
                              const AnalysisConfig& cfg, WeightingMode mode) {
    if (record.evaluations.empty()) {
        throw DataError("metrics: record '" + record.run_id + "' has no evaluations");
    }
    cfg.validate(scenario.options.size());

    std::optional<std::vector<double>> weights;
    if (mode == WeightingMode::CoherenceWeighted) {
        if (!record.assessments) {
            throw DataError("metrics: record '" + record.run_id +
                            "' has no assessments for weighted scoring");
        }
        std::vector<double> w;
        for (const auto& ev : record.evaluations) {
            const CoherenceAssessment* found = nullptr;
            for (const auto& a : *record.assessments) {
                if (a.role == ev.role) {
                    found = &a;
                    break;
                }
            }
            if (!found) {
                throw DataError("metrics: no assessment for evaluator '" + ev.role + "' in '" +
                                record.run_id + "'");
            }
            w.push_back(found->score);
        }
        weights = std::move(w);
    }

    MetricsBundle out;
    out.weighting = mode;
    out.first_choice_tallies = first_choice_tallies(record.evaluations, scenario.options, weights);
    double n = 0.0;
    for (const auto& [id, v] : out.first_choice_tallies) n += v;
    if (n <= 0.0) {
        throw DegenerateStatError("metrics: all coherence weights are zero in '" + record.run_id +
                                  "'");
    }
    out.fcc = first_choice_concentration(out.first_choice_tallies, n, scenario.options.size());
    out.borda_scores = borda_scores(record.evaluations, scenario.options, cfg.borda_points,
                                    weights);
    out.borda_margin = borda_margin(out.borda_scores, n, cfg.borda_points.front());
    std::vector<double> shares;
    for (const auto& [id, v] : out.first_choice_tallies) shares.push_back(v / n);
    out.effective_perspectives = effective_perspectives(shares);
    out.winner = winner_of(out.borda_scores);
    if (mode == WeightingMode::CoherenceWeighted) {
        out.voice_authenticity = voice_authenticity(*record.assessments, cfg.coherence_threshold);
    }
    return out;
}

} // namespace council::metrics
