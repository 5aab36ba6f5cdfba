#pragma once

// Tension taxonomy: which value-perspective pairs should disagree, and
// whether the observed agreement or disagreement can be trusted given the
// evaluators' coherence scores.

#include <map>
#include <string>
#include <vector>

#include "council/types.hpp"

namespace council::metrics {

struct TensionPair {
    std::string first;
    std::string second;
    bool indirect = false; // instantiated via a secondary-trait bearer
};

struct TensionPairMap {
    std::vector<TensionPair> pairs;
};

// The six published pairs; the Creativity-involving three are indirect.
TensionPairMap default_tension_pairs();

enum class TensionCategory {
    AuthenticDisagreement,
    GenuineAgreement,
    SuspectAgreement,
    Partial,
};

std::string to_string(TensionCategory c);

struct TensionInstance {
    TensionPair pair;
    std::string run_id;
    std::string role_a;
    std::string role_b;
    std::string choice_a;
    std::string choice_b;
    double coherence_a = 0.0;
    double coherence_b = 0.0;
    bool classified = false; // false: an assessment was missing
    TensionCategory category = TensionCategory::Partial;
};

struct TensionDistribution {
    std::vector<TensionInstance> instances;
    std::map<std::string, std::size_t> counts; // category name -> count
    std::size_t unclassifiable = 0;
    std::size_t total = 0; // classified + unclassifiable
    double trustworthy_rate = 0.0; // (authentic + genuine) / total
    std::vector<std::string> uninstantiable; // "First|Second" with no bearer
};

// Both coherent & choices differ -> authentic disagreement; both coherent &
// equal -> genuine agreement; equal & any below threshold -> suspect
// agreement; differ & any below threshold -> partial.
TensionCategory classify_tension(const std::string& choice_a, double coherence_a,
                                 const std::string& choice_b, double coherence_b,
                                 double threshold);

// Instantiates every pair as all qualifying evaluator-role pairs per record:
// bearers hold the perspective as primary, or as secondary for indirect
// pairs when no primary bearer exists. Instances missing an assessment land
// in the unclassifiable bucket.
TensionDistribution tension_rate(const std::vector<DeliberationRecord>& records,
                                 const TensionPairMap& map, const std::vector<AgentRole>& roles,
                                 double threshold);

} // namespace council::metrics
