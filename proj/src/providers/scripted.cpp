#include <fstream>

#include "council/errors.hpp"
#include "council/providers.hpp"

namespace council {

void ScriptedProvider::add_rule(ScriptRule rule) {
    if (rule.responses.empty()) {
        throw ConfigError("scripted provider: rule without responses");
    }
    std::lock_guard<std::mutex> lock(mutex_);
    rules_.push_back(RuleState{std::move(rule), 0});
}

namespace {

bool matches(const ScriptRule& r, const GenerationRequest& req, const CallSite& site) {
    if (!r.role.empty() && r.role != site.role) return false;
    if (!r.phase.empty() && r.phase != site.phase) return false;
    if (r.run >= 0 && r.run != site.run_index) return false;
    if (!r.target.empty() && r.target != site.target) return false;
    if (!r.model.empty() && r.model != req.model) return false;
    return true;
}

int specificity(const ScriptRule& r) {
    return int(!r.role.empty()) + int(!r.phase.empty()) + int(r.run >= 0) +
           int(!r.target.empty()) + int(!r.model.empty());
}

} // namespace

GenerationResponse ScriptedProvider::do_generate(const GenerationRequest& request,
                                                 const CallSite& site) {
    std::lock_guard<std::mutex> lock(mutex_);
    RuleState* best = nullptr;
    int best_spec = -1;
    for (auto& state : rules_) {
        if (!matches(state.rule, request, site)) continue;
        int spec = specificity(state.rule);
        if (spec > best_spec) {
            best = &state;
            best_spec = spec;
        }
    }
    if (best == nullptr) {
        throw ProviderError("scripted provider '" + id() + "' has no response for role='" +
                            site.role + "' phase='" + site.phase + "' run=" +
                            std::to_string(site.run_index) + " target='" + site.target +
                            "' model='" + request.model + "'");
    }
    std::size_t idx = std::min(best->next, best->rule.responses.size() - 1);
    ++best->next;

    GenerationResponse res;
    res.text = best->rule.responses[idx];
    res.provider_id = id();
    res.model = request.model;
    return res;
}

std::shared_ptr<ScriptedProvider> ScriptedProvider::from_json(const ojson& script,
                                                              const std::string& id) {
    auto provider = std::make_shared<ScriptedProvider>(id);
    const ojson& rules = require_field(script, "rules", "script");
    if (!rules.is_array()) throw ConfigError("script: 'rules' must be an array");
    for (const auto& r : rules) {
        ScriptRule rule;
        rule.role = r.value("role", std::string{});
        rule.phase = r.value("phase", std::string{});
        rule.run = r.value("run", -1);
        rule.target = r.value("target", std::string{});
        rule.model = r.value("model", std::string{});
        if (r.contains("responses")) {
            for (const auto& t : r.at("responses")) rule.responses.push_back(t.get<std::string>());
        } else if (r.contains("response")) {
            rule.responses.push_back(r.at("response").get<std::string>());
        }
        provider->add_rule(std::move(rule));
    }
    return provider;
}

std::shared_ptr<ScriptedProvider> ScriptedProvider::from_file(const std::filesystem::path& path,
                                                              const std::string& id) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open script file " + path.string());
    ojson script;
    try {
        in >> script;
    } catch (const std::exception& e) {
        throw ConfigError("script file " + path.string() + ": " + e.what());
    }
    return from_json(script, id);
}

} // namespace council
