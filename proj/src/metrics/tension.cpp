#include "council/tension.hpp"

#include <algorithm>

#include "council/errors.hpp"

namespace council::metrics {

TensionPairMap default_tension_pairs() {
    TensionPairMap m;
    m.pairs = {
        {"Security Focus", "Risk Tolerance", false},
        {"Security Focus", "Creativity", true},
        {"Performance Focus", "Simplicity Preference", false},
        {"Pragmatism", "Creativity", true},
        {"Pragmatism", "Risk Tolerance", false},
        {"Simplicity Preference", "Creativity", true},
    };
    return m;
}

std::string to_string(TensionCategory c) {
    switch (c) {
        case TensionCategory::AuthenticDisagreement: return "authentic_disagreement";
        case TensionCategory::GenuineAgreement: return "genuine_agreement";
        case TensionCategory::SuspectAgreement: return "suspect_agreement";
        case TensionCategory::Partial: return "partial";
    }
    return "?";
}

TensionCategory classify_tension(const std::string& choice_a, double coherence_a,
                                 const std::string& choice_b, double coherence_b,
                                 double threshold) {
    bool coherent = coherence_a >= threshold && coherence_b >= threshold;
    bool agree = choice_a == choice_b;
    if (coherent) {
        return agree ? TensionCategory::GenuineAgreement
                     : TensionCategory::AuthenticDisagreement;
    }
    return agree ? TensionCategory::SuspectAgreement : TensionCategory::Partial;
}

namespace {

// Evaluator roles bearing `perspective` as primary; for indirect pairs, a
// perspective with no primary bearer falls back to secondary-trait bearers.
std::vector<const AgentRole*> bearers_of(const std::string& perspective,
                                         const std::vector<AgentRole>& roles, bool indirect) {
    std::vector<const AgentRole*> primary;
    for (const auto& r : roles) {
        if (r.kind == RoleKind::Evaluator && r.primary_perspective == perspective) {
            primary.push_back(&r);
        }
    }
    if (!primary.empty() || !indirect) return primary;
    std::vector<const AgentRole*> secondary;
    for (const auto& r : roles) {
        if (r.kind == RoleKind::Evaluator && r.secondary_perspective &&
            *r.secondary_perspective == perspective) {
            secondary.push_back(&r);
        }
    }
    return secondary;
}

const EvaluationRecord* find_evaluation(const DeliberationRecord& rec, const std::string& role) {
    for (const auto& e : rec.evaluations) {
        if (e.role == role) return &e;
    }
    return nullptr;
}

const CoherenceAssessment* find_assessment(const DeliberationRecord& rec,
                                           const std::string& role) {
    if (!rec.assessments) return nullptr;
    for (const auto& a : *rec.assessments) {
        if (a.role == role) return &a;
    }
    return nullptr;
}

} // namespace

TensionDistribution tension_rate(const std::vector<DeliberationRecord>& records,
                                 const TensionPairMap& map, const std::vector<AgentRole>& roles,
                                 double threshold) {
    TensionDistribution dist;
    for (const auto& name :
         {"authentic_disagreement", "genuine_agreement", "suspect_agreement", "partial"}) {
        dist.counts[name] = 0;
    }

    for (const auto& pair : map.pairs) {
        if (pair.first == pair.second) {
            throw ConfigError("tension pair pairs '" + pair.first + "' with itself");
        }
        auto side_a = bearers_of(pair.first, roles, pair.indirect);
        auto side_b = bearers_of(pair.second, roles, pair.indirect);
        if (side_a.empty() || side_b.empty()) {
            dist.uninstantiable.push_back(pair.first + "|" + pair.second);
            continue;
        }
        for (const auto& rec : records) {
            for (const AgentRole* ra : side_a) {
                for (const AgentRole* rb : side_b) {
                    if (ra->name == rb->name) continue;
                    const EvaluationRecord* ea = find_evaluation(rec, ra->name);
                    const EvaluationRecord* eb = find_evaluation(rec, rb->name);
                    if (!ea || !eb) {
                        throw DataError("tension: record '" + rec.run_id +
                                        "' lacks an evaluation for role '" +
                                        (ea ? rb->name : ra->name) + "'");
                    }
                    TensionInstance inst;
                    inst.pair = pair;
                    inst.run_id = rec.run_id;
                    inst.role_a = ra->name;
                    inst.role_b = rb->name;
                    inst.choice_a = ea->ranking.first_choice();
                    inst.choice_b = eb->ranking.first_choice();
                    const CoherenceAssessment* ca = find_assessment(rec, ra->name);
                    const CoherenceAssessment* cb = find_assessment(rec, rb->name);
                    if (!ca || !cb) {
                        inst.classified = false;
                        ++dist.unclassifiable;
                    } else {
                        inst.coherence_a = ca->score;
                        inst.coherence_b = cb->score;
                        inst.classified = true;
                        inst.category = classify_tension(inst.choice_a, ca->score, inst.choice_b,
                                                         cb->score, threshold);
                        ++dist.counts[to_string(inst.category)];
                    }
                    dist.instances.push_back(std::move(inst));
                }
            }
        }
    }

    dist.total = dist.instances.size();
    if (dist.total > 0) {
        double trusted = static_cast<double>(dist.counts["authentic_disagreement"] +
                                             dist.counts["genuine_agreement"]);
        dist.trustworthy_rate = trusted / static_cast<double>(dist.total);
    }
    return dist;
}

} // namespace council::metrics
