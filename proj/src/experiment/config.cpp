#include <algorithm>
#include <fstream>
#include <set>

#include "council/errors.hpp"
#include "council/experiment.hpp"
#include "council/hash.hpp"

namespace council {

namespace {

ojson read_json_file(const std::filesystem::path& path, const std::string& what) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + what + " file: " + path.string());
    ojson j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(what + " file " + path.string() + " is not valid JSON: " + e.what());
    }
    return j;
}

std::filesystem::path resolve(const std::filesystem::path& base_dir, const std::string& ref) {
    std::filesystem::path p(ref);
    return p.is_absolute() ? p : base_dir / p;
}

// A state assignment entry is an inline per-role map, a single binding
// applied to every role, or a path to a file holding either.
ModelAssignment parse_assignment(const ojson& j, const std::vector<AgentRole>& roles,
                                 const std::filesystem::path& base_dir, const std::string& which) {
    if (j.is_string()) {
        return parse_assignment(read_json_file(resolve(base_dir, j.get<std::string>()),
                                               which + " assignment"),
                                roles, base_dir, which);
    }
    if (!j.is_object()) throw ConfigError(which + " assignment must be an object or a path");
    if (j.contains("model")) { // single binding for the whole council
        ModelBinding binding = model_binding_from_json(j);
        ModelAssignment out;
        for (const auto& role : roles) out[role.name] = binding;
        return out;
    }
    ModelAssignment out = model_assignment_from_json(j);
    for (const auto& role : roles) {
        if (!out.count(role.name)) {
            throw ConfigError(which + " assignment is missing role '" + role.name + "'");
        }
    }
    return out;
}

HttpEndpoint parse_http_endpoint(const ojson& j, const std::string& id) {
    HttpEndpoint e;
    e.id = id;
    e.base_url = j.value("base_url", std::string{});
    e.adapter = j.value("adapter", std::string{"council"});
    e.auth_env = j.value("auth_env", std::string{});
    e.max_in_flight = j.value("max_in_flight", e.max_in_flight);
    e.retries = j.value("retries", e.retries);
    e.backoff_ms = j.value("backoff_ms", e.backoff_ms);
    e.connect_timeout_s = j.value("connect_timeout_s", e.connect_timeout_s);
    e.read_timeout_s = j.value("read_timeout_s", e.read_timeout_s);
    return e;
}

} // namespace

ExperimentConfig experiment_config_from_json(const ojson& j,
                                             const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
    ExperimentConfig cfg;
    cfg.master_seed = j.value("master_seed", std::uint64_t{0});
    cfg.runs_a = j.value("runs_a", cfg.runs_a);
    cfg.runs_b = j.value("runs_b", cfg.runs_b);
    cfg.max_parse_attempts = j.value("max_parse_attempts", cfg.max_parse_attempts);

    for (const ojson& entry : require_field(j, "scenarios", "experiment config")) {
        if (entry.is_string()) {
            cfg.scenarios.push_back(scenario_from_json(
                read_json_file(resolve(base_dir, entry.get<std::string>()), "scenario")));
        } else {
            cfg.scenarios.push_back(scenario_from_json(entry));
        }
    }

    for (const ojson& entry : require_field(j, "perspectives", "experiment config")) {
        ValuePerspective p = perspective_from_json(entry);
        cfg.perspectives[p.name] = p;
    }
    for (const ojson& entry : require_field(j, "roles", "experiment config")) {
        cfg.roles.push_back(agent_role_from_json(entry));
    }

    cfg.state_a = parse_assignment(require_field(j, "state_a", "experiment config"), cfg.roles,
                                   base_dir, "state_a");
    cfg.state_b = parse_assignment(require_field(j, "state_b", "experiment config"), cfg.roles,
                                   base_dir, "state_b");
    cfg.judge = model_binding_from_json(require_field(j, "judge", "experiment config"));
    cfg.anchors = j.contains("anchors") ? anchors_from_json(j.at("anchors"))
                                        : default_calibration_anchors();

    if (j.contains("templates_dir")) {
        cfg.templates =
            PromptTemplateSet::from_dir(resolve(base_dir, j.at("templates_dir").get<std::string>()));
    } else {
        cfg.templates = PromptTemplateSet::builtin();
    }

    for (const ojson& entry : require_field(j, "endpoints", "experiment config")) {
        EndpointSpec spec;
        spec.id = require_field(entry, "id", "endpoint").get<std::string>();
        spec.kind = entry.value("kind", std::string{"http"});
        if (spec.kind != "http" && spec.kind != "scripted" && spec.kind != "keyword_judge") {
            throw ConfigError("endpoint '" + spec.id + "' has unknown kind '" + spec.kind + "'");
        }
        spec.http = parse_http_endpoint(entry, spec.id);
        if (entry.contains("script")) {
            spec.script = resolve(base_dir, entry.at("script").get<std::string>()).string();
        }
        if (entry.contains("cache_dir")) {
            spec.cache_dir = resolve(base_dir, entry.at("cache_dir").get<std::string>()).string();
        }
        cfg.endpoints.push_back(std::move(spec));
    }

    if (j.contains("analysis")) cfg.analysis = analysis_config_from_json(j.at("analysis"));
    if (j.contains("profiling_battery")) {
        for (const ojson& entry : j.at("profiling_battery")) {
            cfg.profiling_battery.push_back(entry.get<std::string>());
        }
    }

    cfg.validate();
    return cfg;
}

ojson apply_overrides(ojson document, const std::vector<std::string>& overrides) {
    for (const std::string& entry : overrides) {
        auto eq = entry.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError("override '" + entry + "' is not key=value");
        }
        std::string path = entry.substr(0, eq);
        std::string raw = entry.substr(eq + 1);

        std::vector<std::string> keys;
        std::size_t start = 0;
        while (true) {
            auto dot = path.find('.', start);
            keys.push_back(path.substr(start, dot == std::string::npos ? dot : dot - start));
            if (dot == std::string::npos) break;
            start = dot + 1;
        }

        ojson* node = &document;
        for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
            if (!node->is_object() || !node->contains(keys[i])) {
                throw ConfigError("override path '" + path + "' does not exist in the config");
            }
            node = &node->at(keys[i]);
        }
        if (!node->is_object() || !node->contains(keys.back())) {
            throw ConfigError("override path '" + path + "' does not exist in the config");
        }
        ojson value = ojson::parse(raw, nullptr, false);
        (*node)[keys.back()] = value.is_discarded() ? ojson(raw) : value;
    }
    return document;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path,
                                        const std::vector<std::string>& overrides) {
    ojson document = apply_overrides(read_json_file(path, "config"), overrides);
    return experiment_config_from_json(document, path.parent_path());
}

void ExperimentConfig::validate() const {
    if (scenarios.empty()) throw ConfigError("config defines no scenarios");
    std::set<std::string> scenario_keys;
    for (const auto& s : scenarios) {
        s.validate();
        if (!scenario_keys.insert(s.id + "/" + s.variant).second) {
            throw ConfigError("duplicate scenario " + s.id + " variant " + s.variant);
        }
    }
    if (roles.empty()) throw ConfigError("config defines no roles");
    // A champion may share its evaluator's name (and thereby its binding);
    // within a kind, names must be unique.
    std::set<std::string> role_names;
    for (const auto& role : roles) {
        std::string key =
            role.name + "/" + (role.kind == RoleKind::Champion ? "champion" : "evaluator");
        if (!role_names.insert(key).second) {
            throw ConfigError("duplicate role '" + key + "'");
        }
        if (!perspectives.count(role.primary_perspective)) {
            throw ConfigError("role '" + role.name + "' uses undefined perspective '" +
                              role.primary_perspective + "'");
        }
        if (role.secondary_perspective && !perspectives.count(*role.secondary_perspective)) {
            throw ConfigError("role '" + role.name + "' uses undefined secondary perspective '" +
                              *role.secondary_perspective + "'");
        }
        if (!role.trait_weights.empty()) {
            double top = 0.0;
            for (const auto& [name, w] : role.trait_weights) top = std::max(top, w);
            auto it = role.trait_weights.find(role.primary_perspective);
            if (it == role.trait_weights.end() || it->second < top) {
                throw ConfigError("role '" + role.name +
                                  "': primary perspective does not carry the top trait weight");
            }
        }
        if (role.kind == RoleKind::Champion && !role.champion_option_id) {
            throw ConfigError("champion '" + role.name + "' has no option id");
        }
    }
    if (evaluators().empty()) throw ConfigError("config defines no evaluator roles");
    for (const auto& s : scenarios) {
        std::set<std::string> championed;
        for (const auto& role : champions()) {
            if (!s.find_option(*role.champion_option_id)) {
                throw ConfigError("champion '" + role.name + "' targets option '" +
                                  *role.champion_option_id + "' absent from scenario " + s.id);
            }
            championed.insert(*role.champion_option_id);
        }
        if (championed.size() != s.option_count()) {
            throw ConfigError("scenario " + s.id + " needs one champion per option");
        }
        analysis.validate(s.option_count());
    }

    std::string base_model;
    for (const auto& [role, binding] : state_a) {
        if (base_model.empty()) base_model = binding.model;
        if (binding.model != base_model) {
            throw ConfigError("state A must assign one base model to every role; found '" +
                              base_model + "' and '" + binding.model + "'");
        }
    }

    std::set<std::string> endpoint_ids;
    for (const auto& spec : endpoints) {
        if (!endpoint_ids.insert(spec.id).second) {
            throw ConfigError("duplicate endpoint id '" + spec.id + "'");
        }
    }
    auto check_binding = [&](const ModelBinding& b, const std::string& where) {
        if (!endpoint_ids.count(b.endpoint)) {
            throw ConfigError(where + " references unknown endpoint '" + b.endpoint + "'");
        }
    };
    for (const auto& [role, binding] : state_a) check_binding(binding, "state_a[" + role + "]");
    for (const auto& [role, binding] : state_b) check_binding(binding, "state_b[" + role + "]");
    check_binding(judge, "judge");

    if (runs_a < 1 || runs_b < 1) throw ConfigError("run counts must be at least 1");
    if (max_parse_attempts < 1) throw ConfigError("max_parse_attempts must be at least 1");
    templates.validate();
    if (anchors.empty()) throw ConfigError("config defines no calibration anchors");
}

std::string ExperimentConfig::config_hash() const {
    ojson j;
    j["master_seed"] = master_seed;
    j["scenarios"] = ojson::array();
    for (const auto& s : scenarios) j["scenarios"].push_back(to_json(s));
    j["perspectives"] = ojson::array();
    for (const auto& [name, p] : perspectives) j["perspectives"].push_back(to_json(p));
    j["roles"] = ojson::array();
    for (const auto& role : roles) j["roles"].push_back(to_json(role));
    j["state_a"] = to_json(state_a);
    j["state_b"] = to_json(state_b);
    j["runs_a"] = runs_a;
    j["runs_b"] = runs_b;
    j["judge"] = to_json(judge);
    j["anchors"] = to_json(anchors);
    j["templates"] = templates.content_hash();
    j["analysis"] = to_json(analysis);
    j["max_parse_attempts"] = max_parse_attempts;
    return fnv1a64_hex(canonical_dump(j));
}

const Scenario& ExperimentConfig::find_scenario(const std::string& scenario_id,
                                                const std::string& variant) const {
    for (const auto& s : scenarios) {
        if (s.id == scenario_id && s.variant == variant) return s;
    }
    throw ConfigError("config has no scenario '" + scenario_id + "' with variant '" + variant +
                      "'");
}

std::vector<AgentRole> ExperimentConfig::champions() const {
    std::vector<AgentRole> out;
    for (const auto& role : roles) {
        if (role.kind == RoleKind::Champion) out.push_back(role);
    }
    return out;
}

std::vector<AgentRole> ExperimentConfig::evaluators() const {
    std::vector<AgentRole> out;
    for (const auto& role : roles) {
        if (role.kind == RoleKind::Evaluator) out.push_back(role);
    }
    return out;
}

const ModelAssignment& ExperimentConfig::assignment_for(ExperimentState state) const {
    switch (state) {
        case ExperimentState::A: return state_a;
        case ExperimentState::B: return state_b;
        case ExperimentState::C: break;
    }
    throw ConfigError("state C has no model assignment; it derives from state B");
}

ProviderHub build_hub(const ExperimentConfig& cfg, const std::string& provider_mode,
                      const std::filesystem::path& base_dir) {
    if (provider_mode != "live" && provider_mode != "scripted") {
        throw ConfigError("provider mode must be 'live' or 'scripted', got '" + provider_mode +
                          "'");
    }
    ProviderHub hub;
    for (const auto& spec : cfg.endpoints) {
        std::shared_ptr<Provider> provider;
        if (spec.kind == "keyword_judge") {
            provider = std::make_shared<KeywordJudgeProvider>(cfg.perspectives, spec.id);
        } else if (spec.kind == "scripted" || provider_mode == "scripted") {
            if (spec.script.empty()) {
                throw ConfigError("endpoint '" + spec.id +
                                  "' has no script; required for scripted mode");
            }
            provider = ScriptedProvider::from_file(resolve(base_dir, spec.script), spec.id);
        } else {
            provider = std::make_shared<HttpProvider>(spec.http);
            if (!spec.cache_dir.empty()) {
                provider = std::make_shared<CachingProvider>(provider,
                                                             resolve(base_dir, spec.cache_dir));
            }
        }
        hub.add(spec.id, std::move(provider));
    }
    return hub;
}

} // namespace council
