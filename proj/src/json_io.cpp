#include "council/json_io.hpp"

#include <ctime>

#include "council/errors.hpp"

namespace council {

const ojson& require_field(const ojson& j, const std::string& key, const std::string& context) {
    if (!j.is_object() || !j.contains(key)) {
        throw DataError(context + ": missing field '" + key + "'");
    }
    return j.at(key);
}

namespace {

std::string get_string(const ojson& j, const std::string& key, const std::string& context) {
    const ojson& f = require_field(j, key, context);
    if (!f.is_string()) throw DataError(context + ": field '" + key + "' must be a string");
    return f.get<std::string>();
}

double get_double(const ojson& j, const std::string& key, const std::string& context) {
    const ojson& f = require_field(j, key, context);
    if (!f.is_number()) throw DataError(context + ": field '" + key + "' must be a number");
    return f.get<double>();
}

} // namespace

std::string canonical_dump(const ojson& j) {
    return j.dump(); // compact, UTF-8, fixed field order by construction
}

std::string utc_timestamp_now() {
    std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

// --- PolicyOption -----------------------------------------------------------

ojson to_json(const PolicyOption& v) {
    return ojson{{"id", v.id}, {"name", v.name}, {"description", v.description}};
}

PolicyOption policy_option_from_json(const ojson& j) {
    PolicyOption v;
    v.id = get_string(j, "id", "option");
    v.name = get_string(j, "name", "option");
    v.description = get_string(j, "description", "option");
    return v;
}

// --- Scenario ---------------------------------------------------------------

ojson to_json(const Scenario& v) {
    ojson opts = ojson::array();
    for (const auto& o : v.options) opts.push_back(to_json(o));
    return ojson{{"id", v.id}, {"question", v.question}, {"options", opts}, {"variant", v.variant}};
}

Scenario scenario_from_json(const ojson& j) {
    Scenario v;
    v.id = get_string(j, "id", "scenario");
    v.question = get_string(j, "question", "scenario");
    for (const auto& o : require_field(j, "options", "scenario")) {
        v.options.push_back(policy_option_from_json(o));
    }
    v.variant = j.value("variant", std::string("baseline"));
    v.validate();
    return v;
}

// --- ValuePerspective -------------------------------------------------------

ojson to_json(const ValuePerspective& v) {
    return ojson{{"name", v.name}, {"definition", v.definition}, {"keywords", v.keywords}};
}

ValuePerspective perspective_from_json(const ojson& j) {
    ValuePerspective v;
    v.name = get_string(j, "name", "perspective");
    v.definition = get_string(j, "definition", "perspective");
    if (v.definition.empty()) throw ConfigError("perspective '" + v.name + "': empty definition");
    if (j.contains("keywords")) {
        for (const auto& k : j.at("keywords")) v.keywords.push_back(k.get<std::string>());
    }
    return v;
}

// --- AgentRole ----------------------------------------------------------------

ojson to_json(const AgentRole& v) {
    ojson weights = ojson::object();
    for (const auto& [name, w] : v.trait_weights) weights[name] = w;
    ojson j{{"name", v.name},
            {"trait_weights", weights},
            {"primary_perspective", v.primary_perspective},
            {"secondary_perspective", v.secondary_perspective ? ojson(*v.secondary_perspective)
                                                              : ojson(nullptr)},
            {"kind", v.kind == RoleKind::Champion ? "champion" : "evaluator"}};
    j["champion_option"] = v.champion_option_id ? ojson(*v.champion_option_id) : ojson(nullptr);
    return j;
}

AgentRole agent_role_from_json(const ojson& j) {
    AgentRole v;
    v.name = get_string(j, "name", "role");
    for (const auto& [name, w] : require_field(j, "trait_weights", "role").items()) {
        v.trait_weights[name] = w.get<double>();
    }
    v.primary_perspective = get_string(j, "primary_perspective", "role");
    if (j.contains("secondary_perspective") && !j.at("secondary_perspective").is_null()) {
        v.secondary_perspective = j.at("secondary_perspective").get<std::string>();
    }
    std::string kind = get_string(j, "kind", "role");
    if (kind == "champion") {
        v.kind = RoleKind::Champion;
    } else if (kind == "evaluator") {
        v.kind = RoleKind::Evaluator;
    } else {
        throw ConfigError("role '" + v.name + "': unknown kind '" + kind + "'");
    }
    if (j.contains("champion_option") && !j.at("champion_option").is_null()) {
        v.champion_option_id = j.at("champion_option").get<std::string>();
    }
    if ((v.kind == RoleKind::Champion) != v.champion_option_id.has_value()) {
        throw ConfigError("role '" + v.name + "': champion_option must be set iff kind is champion");
    }
    if (v.secondary_perspective && *v.secondary_perspective == v.primary_perspective) {
        throw ConfigError("role '" + v.name + "': secondary perspective equals primary");
    }
    return v;
}

// --- ModelBinding / ModelAssignment ------------------------------------------

ojson to_json(const ModelBinding& v) {
    return ojson{{"model", v.model},
                 {"endpoint", v.endpoint},
                 {"temperature", v.temperature},
                 {"seed_policy", v.seed_policy}};
}

ModelBinding model_binding_from_json(const ojson& j) {
    ModelBinding v;
    v.model = get_string(j, "model", "model binding");
    v.endpoint = get_string(j, "endpoint", "model binding");
    v.temperature = j.value("temperature", 0.7);
    v.seed_policy = j.value("seed_policy", std::string("derived"));
    return v;
}

ojson to_json(const ModelAssignment& v) {
    ojson j = ojson::object();
    for (const auto& [role, binding] : v) j[role] = to_json(binding);
    return j;
}

ModelAssignment model_assignment_from_json(const ojson& j) {
    ModelAssignment v;
    for (const auto& [role, binding] : j.items()) {
        v[role] = model_binding_from_json(binding);
    }
    return v;
}

// --- Transcript ---------------------------------------------------------------

namespace {
std::string phase_name(DebatePhase p) {
    switch (p) {
        case DebatePhase::Position: return "position";
        case DebatePhase::Critique: return "critique";
        case DebatePhase::Defense: return "defense";
    }
    return "?";
}

DebatePhase phase_from_name(const std::string& s) {
    if (s == "position") return DebatePhase::Position;
    if (s == "critique") return DebatePhase::Critique;
    if (s == "defense") return DebatePhase::Defense;
    throw DataError("unknown transcript phase '" + s + "'");
}
} // namespace

ojson to_json(const TranscriptEntry& v) {
    return ojson{{"role", v.role},
                 {"round", v.round},
                 {"kind", phase_name(v.kind)},
                 {"target_option", v.target_option},
                 {"text", v.text}};
}

TranscriptEntry transcript_entry_from_json(const ojson& j) {
    TranscriptEntry v;
    v.role = get_string(j, "role", "transcript entry");
    v.round = require_field(j, "round", "transcript entry").get<int>();
    v.kind = phase_from_name(get_string(j, "kind", "transcript entry"));
    v.target_option = get_string(j, "target_option", "transcript entry");
    v.text = get_string(j, "text", "transcript entry");
    return v;
}

ojson to_json(const DebateTranscript& v) {
    ojson entries = ojson::array();
    for (const auto& e : v.entries) entries.push_back(to_json(e));
    return ojson{{"entries", entries}};
}

DebateTranscript transcript_from_json(const ojson& j) {
    DebateTranscript v;
    for (const auto& e : require_field(j, "entries", "transcript")) {
        v.entries.push_back(transcript_entry_from_json(e));
    }
    return v;
}

// --- Ranking / evaluations ----------------------------------------------------

ojson to_json(const Ranking& v) {
    return ojson(v.option_ids);
}

Ranking ranking_from_json(const ojson& j) {
    Ranking v;
    if (!j.is_array()) throw DataError("ranking must be an array of option ids");
    for (const auto& id : j) v.option_ids.push_back(id.get<std::string>());
    return v;
}

ojson to_json(const EvaluationRecord& v) {
    return ojson{{"role", v.role},
                 {"perspective", v.perspective},
                 {"ranking", to_json(v.ranking)},
                 {"reasoning", v.reasoning},
                 {"raw_response", v.raw_response},
                 {"parse_attempts", v.parse_attempts}};
}

EvaluationRecord evaluation_from_json(const ojson& j) {
    EvaluationRecord v;
    v.role = get_string(j, "role", "evaluation");
    v.perspective = get_string(j, "perspective", "evaluation");
    v.ranking = ranking_from_json(require_field(j, "ranking", "evaluation"));
    v.reasoning = get_string(j, "reasoning", "evaluation");
    v.raw_response = get_string(j, "raw_response", "evaluation");
    v.parse_attempts = require_field(j, "parse_attempts", "evaluation").get<int>();
    if (v.reasoning.empty()) throw DataError("evaluation for '" + v.role + "': empty reasoning");
    if (v.parse_attempts < 1) throw DataError("evaluation for '" + v.role + "': parse_attempts < 1");
    return v;
}

ojson to_json(const CoherenceAssessment& v) {
    return ojson{{"role", v.role},
                 {"score", v.score},
                 {"judge", v.judge},
                 {"raw_response", v.raw_response},
                 {"request_fingerprint", v.request_fingerprint}};
}

CoherenceAssessment assessment_from_json(const ojson& j) {
    CoherenceAssessment v;
    v.role = get_string(j, "role", "assessment");
    v.score = get_double(j, "score", "assessment");
    v.judge = get_string(j, "judge", "assessment");
    v.raw_response = get_string(j, "raw_response", "assessment");
    v.request_fingerprint = get_string(j, "request_fingerprint", "assessment");
    if (v.score < 0.0 || v.score > 1.0) {
        throw DataError("assessment for '" + v.role + "': score outside [0,1]");
    }
    return v;
}

// --- DeliberationRecord ---------------------------------------------------------

namespace {
std::string status_name(RunStatus s) {
    switch (s) {
        case RunStatus::Completed: return "completed";
        case RunStatus::Failed: return "failed";
        case RunStatus::PartialValidation: return "partial_validation";
    }
    return "?";
}

RunStatus status_from_name(const std::string& s) {
    if (s == "completed") return RunStatus::Completed;
    if (s == "failed") return RunStatus::Failed;
    if (s == "partial_validation") return RunStatus::PartialValidation;
    throw DataError("unknown run status '" + s + "'");
}
} // namespace

ojson to_json(const DeliberationRecord& v) {
    ojson j{{"schema", "council/deliberation-record/v1"},
            {"run_id", v.run_id},
            {"scenario_id", v.scenario_id},
            {"variant", v.variant},
            {"state", to_string(v.state)},
            {"parent_run_id", v.parent_run_id ? ojson(*v.parent_run_id) : ojson(nullptr)},
            {"master_seed", v.master_seed},
            {"run_seed", v.run_seed},
            {"config_hash", v.config_hash},
            {"status", status_name(v.status)}};
    j["failure"] = v.failure ? ojson{{"stage", v.failure->stage}, {"message", v.failure->message}}
                             : ojson(nullptr);
    j["model_assignment"] = to_json(v.model_assignment);
    j["transcript"] = to_json(v.transcript);
    ojson evals = ojson::array();
    for (const auto& e : v.evaluations) evals.push_back(to_json(e));
    j["evaluations"] = evals;
    if (v.assessments) {
        ojson a = ojson::array();
        for (const auto& x : *v.assessments) a.push_back(to_json(x));
        j["assessments"] = a;
    } else {
        j["assessments"] = nullptr;
    }
    j["created"] = v.created;
    return j;
}

DeliberationRecord record_from_json(const ojson& j) {
    DeliberationRecord v;
    v.run_id = get_string(j, "run_id", "record");
    v.scenario_id = get_string(j, "scenario_id", "record");
    v.variant = get_string(j, "variant", "record");
    v.state = state_from_string(get_string(j, "state", "record"));
    if (j.contains("parent_run_id") && !j.at("parent_run_id").is_null()) {
        v.parent_run_id = j.at("parent_run_id").get<std::string>();
    }
    v.master_seed = require_field(j, "master_seed", "record").get<std::uint64_t>();
    v.run_seed = require_field(j, "run_seed", "record").get<std::uint64_t>();
    v.config_hash = get_string(j, "config_hash", "record");
    v.status = status_from_name(get_string(j, "status", "record"));
    if (j.contains("failure") && !j.at("failure").is_null()) {
        RunFailure f;
        f.stage = get_string(j.at("failure"), "stage", "record failure");
        f.message = get_string(j.at("failure"), "message", "record failure");
        v.failure = f;
    }
    v.model_assignment = model_assignment_from_json(require_field(j, "model_assignment", "record"));
    v.transcript = transcript_from_json(require_field(j, "transcript", "record"));
    for (const auto& e : require_field(j, "evaluations", "record")) {
        v.evaluations.push_back(evaluation_from_json(e));
    }
    if (j.contains("assessments") && !j.at("assessments").is_null()) {
        std::vector<CoherenceAssessment> a;
        for (const auto& x : j.at("assessments")) a.push_back(assessment_from_json(x));
        v.assessments = std::move(a);
    }
    v.created = j.value("created", std::string{});
    if (v.state == ExperimentState::C && !v.parent_run_id) {
        throw DataError("record '" + v.run_id + "': state C requires parent_run_id");
    }
    return v;
}

// --- MetricsBundle -------------------------------------------------------------

ojson to_json(const MetricsBundle& v) {
    ojson tallies = ojson::object();
    for (const auto& [id, t] : v.first_choice_tallies) tallies[id] = t;
    ojson scores = ojson::object();
    for (const auto& [id, s] : v.borda_scores) scores[id] = s;
    ojson j{{"first_choice_tallies", tallies},
            {"fcc", v.fcc},
            {"borda_scores", scores},
            {"borda_margin", v.borda_margin},
            {"effective_perspectives", v.effective_perspectives},
            {"winner", v.winner},
            {"weighting", v.weighting == WeightingMode::Unweighted ? "unweighted"
                                                                   : "coherence_weighted"}};
    j["voice_authenticity"] = v.voice_authenticity ? ojson(*v.voice_authenticity) : ojson(nullptr);
    return j;
}

MetricsBundle metrics_bundle_from_json(const ojson& j) {
    MetricsBundle v;
    for (const auto& [id, t] : require_field(j, "first_choice_tallies", "metrics").items()) {
        v.first_choice_tallies[id] = t.get<double>();
    }
    v.fcc = get_double(j, "fcc", "metrics");
    for (const auto& [id, s] : require_field(j, "borda_scores", "metrics").items()) {
        v.borda_scores[id] = s.get<double>();
    }
    v.borda_margin = get_double(j, "borda_margin", "metrics");
    v.effective_perspectives = get_double(j, "effective_perspectives", "metrics");
    v.winner = get_string(j, "winner", "metrics");
    std::string mode = get_string(j, "weighting", "metrics");
    v.weighting = mode == "unweighted" ? WeightingMode::Unweighted : WeightingMode::CoherenceWeighted;
    if (j.contains("voice_authenticity") && !j.at("voice_authenticity").is_null()) {
        v.voice_authenticity = j.at("voice_authenticity").get<double>();
    }
    return v;
}

// --- AnalysisConfig --------------------------------------------------------------

ojson to_json(const AnalysisConfig& v) {
    return ojson{{"alpha", v.alpha},
                 {"bonferroni_alpha", v.bonferroni_alpha},
                 {"bootstrap_resamples", v.bootstrap_resamples},
                 {"coherence_threshold", v.coherence_threshold},
                 {"borda_points", v.borda_points},
                 {"effect_bands",
                  ojson{{"small", v.effect_bands.small_r},
                        {"medium", v.effect_bands.medium_r},
                        {"large", v.effect_bands.large_r}}},
                 {"stat_method", v.stat_method},
                 {"seed", v.seed}};
}

AnalysisConfig analysis_config_from_json(const ojson& j) {
    AnalysisConfig v;
    v.alpha = j.value("alpha", 0.05);
    v.bonferroni_alpha = j.value("bonferroni_alpha", 0.0125);
    v.bootstrap_resamples = j.value("bootstrap_resamples", 10000);
    v.coherence_threshold = j.value("coherence_threshold", 0.6);
    if (j.contains("borda_points")) {
        v.borda_points = j.at("borda_points").get<std::vector<double>>();
    }
    if (j.contains("effect_bands")) {
        const auto& b = j.at("effect_bands");
        v.effect_bands.small_r = b.value("small", 0.1);
        v.effect_bands.medium_r = b.value("medium", 0.3);
        v.effect_bands.large_r = b.value("large", 0.5);
    }
    v.stat_method = j.value("stat_method", std::string{"auto"});
    v.seed = j.value("seed", std::uint64_t{0});
    return v;
}

// --- StatResult -------------------------------------------------------------------

ojson to_json(const BootstrapCi& v) {
    return ojson{{"lo", v.lo}, {"hi", v.hi}, {"resamples", v.resamples}, {"seed", v.seed}};
}

ojson to_json(const StatResult& v) {
    ojson j{{"test", v.test},
            {"statistic", v.statistic},
            {"p_value", v.p_value},
            {"alternative", v.alternative},
            {"method", v.method},
            {"rank_biserial", v.rank_biserial},
            {"effect_band", v.effect_band}};
    j["ci"] = v.ci ? to_json(*v.ci) : ojson(nullptr);
    j["n_a"] = v.n_a;
    j["n_b"] = v.n_b;
    j["zeros_dropped"] = v.zeros_dropped;
    j["significant_primary"] = v.significant_primary;
    j["significant_bonferroni"] = v.significant_bonferroni;
    return j;
}

} // namespace council
