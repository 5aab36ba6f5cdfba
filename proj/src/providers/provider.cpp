#include "council/providers.hpp"

#include "council/errors.hpp"
#include "council/hash.hpp"

namespace council {

std::string cache_key(const GenerationRequest& request) {
    return fnv1a64_hex(canonical_dump(to_json(request)));
}

ojson to_json(const GenerationRequest& v) {
    return ojson{{"model", v.model},
                 {"system", v.system},
                 {"user", v.user},
                 {"temperature", v.temperature},
                 {"seed", v.seed ? ojson(*v.seed) : ojson(nullptr)},
                 {"max_tokens", v.max_tokens}};
}

GenerationRequest generation_request_from_json(const ojson& j) {
    GenerationRequest v;
    v.model = require_field(j, "model", "request").get<std::string>();
    v.system = require_field(j, "system", "request").get<std::string>();
    v.user = require_field(j, "user", "request").get<std::string>();
    v.temperature = j.value("temperature", 0.7);
    if (j.contains("seed") && !j.at("seed").is_null()) {
        v.seed = j.at("seed").get<std::uint64_t>();
    }
    v.max_tokens = j.value("max_tokens", 1024);
    return v;
}

GenerationResponse Provider::generate(const GenerationRequest& request, const CallSite& site) {
    if (request.model.empty()) throw ConfigError("generation request: empty model id");
    if (request.system.empty() || request.user.empty()) {
        throw ConfigError("generation request: prompts must be non-empty");
    }
    if (request.temperature < 0.0) {
        throw ConfigError("generation request: negative temperature");
    }
    if (request.max_tokens <= 0) {
        throw ConfigError("generation request: max_tokens must be positive");
    }
    if (observer_ != nullptr) observer_->on_request(id_, request, site);
    calls_.fetch_add(1);
    return do_generate(request, site);
}

} // namespace council
