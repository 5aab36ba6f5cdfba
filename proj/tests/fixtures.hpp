#pragma once

// Shared scripted-council fixtures: a three-option scenario, the default
// seven-member council, and helpers that run a fully scripted deliberation.

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "council/deliberation.hpp"
#include "council/providers.hpp"
#include "council/types.hpp"

namespace fx {

using namespace council;

inline Scenario scenario() {
    Scenario s;
    s.id = "transit";
    s.question = "How should the city expand public transit?";
    s.options = {{"A", "Light Rail", "Build a light rail line through the corridor."},
                 {"B", "Bus Network", "Triple bus frequency on existing routes."},
                 {"C", "Congestion Pricing", "Price road use and fund shuttles."}};
    return s;
}

inline std::map<std::string, ValuePerspective> perspectives() {
    std::map<std::string, ValuePerspective> m;
    m["Security Focus"] = {"Security Focus", "Prefers proven, stable, well-understood choices.",
                           {"proven", "stable", "safe"}};
    m["Risk Tolerance"] = {"Risk Tolerance", "Accepts uncertainty in pursuit of upside.",
                           {"bold", "upside", "experiment"}};
    m["Pragmatism"] = {"Pragmatism", "Weighs feasibility and cost above ideals.",
                       {"practical", "cost", "feasible"}};
    m["Performance Focus"] = {"Performance Focus", "Optimizes measurable outcomes.",
                              {"throughput", "metrics", "efficient"}};
    m["Simplicity Preference"] = {"Simplicity Preference", "Favors the least machinery.",
                                  {"simple", "minimal", "clear"}};
    return m;
}

inline AgentRole champion(const std::string& name, const std::string& perspective,
                          const std::string& option) {
    AgentRole r;
    r.name = name;
    r.trait_weights = {{perspective, 0.9}};
    r.primary_perspective = perspective;
    r.kind = RoleKind::Champion;
    r.champion_option_id = option;
    return r;
}

inline AgentRole evaluator(const std::string& name, const std::string& perspective) {
    AgentRole r;
    r.name = name;
    r.trait_weights = {{perspective, 0.9}};
    r.primary_perspective = perspective;
    r.kind = RoleKind::Evaluator;
    return r;
}

inline std::vector<AgentRole> champions() {
    return {champion("Conservative", "Security Focus", "A"),
            champion("Innovator", "Risk Tolerance", "B"),
            champion("Pragmatist", "Pragmatism", "C")};
}

inline std::vector<AgentRole> evaluators() {
    return {evaluator("Conservative", "Security Focus"),
            evaluator("Innovator", "Risk Tolerance"),
            evaluator("Pragmatist", "Pragmatism"),
            evaluator("Perfectionist", "Security Focus"),
            evaluator("Minimalist", "Simplicity Preference"),
            evaluator("Driver", "Performance Focus"),
            evaluator("Guardian", "Security Focus")};
}

inline ModelAssignment assignment(const std::vector<AgentRole>& roles,
                                  const std::string& endpoint = "scripted") {
    ModelAssignment a;
    for (const auto& r : roles) a[r.name] = ModelBinding{"m-test", endpoint, 0.7, "derived"};
    return a;
}

inline std::shared_ptr<ScriptedProvider> debate_script(const Scenario& s,
                                                       const std::vector<AgentRole>& champs) {
    auto p = std::make_shared<ScriptedProvider>("scripted");
    for (const auto& champ : champs) {
        ScriptRule pos;
        pos.role = champ.name;
        pos.phase = "position";
        pos.responses = {"POS-" + champ.name};
        p->add_rule(pos);
        ScriptRule def;
        def.role = champ.name;
        def.phase = "defense";
        def.responses = {"DEF-" + champ.name};
        p->add_rule(def);
        for (const auto& opt : s.options) {
            if (opt.id == *champ.champion_option_id) continue;
            ScriptRule crit;
            crit.role = champ.name;
            crit.phase = "critique";
            crit.target = opt.id;
            crit.responses = {"CRIT-" + champ.name + "-" + opt.id};
            p->add_rule(crit);
        }
    }
    return p;
}

inline void add_evaluation_rules(ScriptedProvider& p, const std::vector<AgentRole>& evals,
                                 const std::vector<Ranking>& rankings = {},
                                 const std::vector<std::string>& reasonings = {}) {
    static const std::vector<std::vector<std::string>> default_orders = {
        {"A", "B", "C"}, {"B", "A", "C"}, {"C", "B", "A"}, {"A", "C", "B"}, {"B", "C", "A"}};
    for (std::size_t i = 0; i < evals.size(); ++i) {
        ScriptRule rule;
        rule.role = evals[i].name;
        rule.phase = "evaluation";
        Ranking rk = i < rankings.size() ? rankings[i]
                                         : Ranking{default_orders[i % default_orders.size()]};
        std::string reason = i < reasonings.size() && !reasonings[i].empty()
                                 ? reasonings[i]
                                 : "eval-reasoning-" + evals[i].name;
        rule.responses = {render_ranking(rk, reason)};
        p.add_rule(rule);
    }
}

struct CapturingObserver : RequestObserver {
    struct Entry {
        std::string provider;
        GenerationRequest request;
        CallSite site;
    };
    std::mutex mutex;
    std::vector<Entry> entries;
    void on_request(const std::string& provider_id, const GenerationRequest& request,
                    const CallSite& site) override {
        std::lock_guard<std::mutex> lock(mutex);
        entries.push_back({provider_id, request, site});
    }
    std::vector<Entry> of_phase(const std::string& phase) {
        std::vector<Entry> out;
        for (const auto& e : entries) {
            if (e.site.phase == phase) out.push_back(e);
        }
        return out;
    }
};

inline bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

// Runs a fully scripted state-B deliberation and packages it as a completed
// record. Rankings/reasonings override the per-evaluator defaults.
inline DeliberationRecord scripted_run(const std::string& run_id = "transit-baseline-B-r0",
                                       std::uint64_t run_seed = 7,
                                       const std::vector<Ranking>& rankings = {},
                                       const std::vector<std::string>& reasonings = {},
                                       RequestObserver* observer = nullptr) {
    Scenario s = scenario();
    auto champs = champions();
    auto evals = evaluators();
    auto script = debate_script(s, champs);
    add_evaluation_rules(*script, evals, rankings, reasonings);
    ProviderHub hub;
    hub.add("scripted", script);
    if (observer) hub.set_observer(observer);

    ModelAssignment assign = assignment(champs);
    for (const auto& [k, v] : assignment(evals)) assign[k] = v;

    Deliberator d(perspectives(), PromptTemplateSet::builtin(), hub);
    DebateOutcome debate = d.run_debate(s, champs, assign, run_seed, 0);
    if (debate.failure) throw std::runtime_error("fixture debate failed: " + debate.failure->message);
    EvaluationOutcome evaluation =
        d.run_evaluation(s, debate.transcript, evals, assign, run_seed, 0);
    if (evaluation.failure) {
        throw std::runtime_error("fixture evaluation failed: " + evaluation.failure->message);
    }

    DeliberationRecord rec;
    rec.run_id = run_id;
    rec.scenario_id = s.id;
    rec.variant = s.variant;
    rec.state = ExperimentState::B;
    rec.master_seed = 1;
    rec.run_seed = run_seed;
    rec.config_hash = "testcfg";
    rec.status = RunStatus::Completed;
    rec.model_assignment = assign;
    rec.transcript = debate.transcript;
    rec.evaluations = evaluation.evaluations;
    rec.created = "2026-01-01T00:00:00Z";
    return rec;
}

} // namespace fx
