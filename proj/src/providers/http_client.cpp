#include <chrono>
#include <cstdlib>
#include <semaphore>
#include <thread>

#include <httplib.h>

#include "council/errors.hpp"
#include "council/providers.hpp"

namespace council {

// Bounds concurrent requests per endpoint (consumer inference servers stall
// past a couple of simultaneous generations).
class HttpProvider::Gate {
  public:
    explicit Gate(int slots) : sem_(slots) {}
    void acquire() { sem_.acquire(); }
    void release() { sem_.release(); }

  private:
    std::counting_semaphore<64> sem_;
};

HttpProvider::HttpProvider(HttpEndpoint endpoint) : Provider(endpoint.id), endpoint_(std::move(endpoint)) {
    if (endpoint_.base_url.empty()) {
        throw ConfigError("endpoint '" + endpoint_.id + "': base_url missing");
    }
    if (endpoint_.adapter != "council" && endpoint_.adapter != "openai_chat" &&
        endpoint_.adapter != "ollama") {
        throw ConfigError("endpoint '" + endpoint_.id + "': unknown adapter '" +
                          endpoint_.adapter + "'");
    }
    if (endpoint_.max_in_flight < 1 || endpoint_.max_in_flight > 64) {
        throw ConfigError("endpoint '" + endpoint_.id + "': max_in_flight outside [1,64]");
    }
    if (!endpoint_.auth_env.empty()) {
        const char* token = std::getenv(endpoint_.auth_env.c_str());
        if (token == nullptr || *token == '\0') {
            throw ConfigError("endpoint '" + endpoint_.id + "': environment variable '" +
                              endpoint_.auth_env + "' is not set");
        }
        token_ = token;
    }
    gate_ = std::make_shared<Gate>(endpoint_.max_in_flight);
}

namespace {

struct WireCall {
    std::string path;
    ojson body;
};

WireCall encode(const HttpEndpoint& ep, const GenerationRequest& req) {
    WireCall call;
    if (ep.adapter == "council") {
        call.path = "/generate";
        call.body = to_json(req);
    } else if (ep.adapter == "openai_chat") {
        call.path = "/v1/chat/completions";
        call.body = ojson{{"model", req.model},
                          {"messages", ojson::array({ojson{{"role", "system"}, {"content", req.system}},
                                                     ojson{{"role", "user"}, {"content", req.user}}})},
                          {"temperature", req.temperature},
                          {"max_tokens", req.max_tokens}};
        if (req.seed) call.body["seed"] = *req.seed;
    } else { // ollama
        call.path = "/api/chat";
        call.body = ojson{{"model", req.model},
                          {"messages", ojson::array({ojson{{"role", "system"}, {"content", req.system}},
                                                     ojson{{"role", "user"}, {"content", req.user}}})},
                          {"stream", false},
                          {"options", ojson{{"temperature", req.temperature},
                                            {"num_predict", req.max_tokens}}}};
        if (req.seed) call.body["options"]["seed"] = *req.seed;
    }
    return call;
}

std::string decode(const HttpEndpoint& ep, const std::string& body, GenerationResponse& out) {
    ojson j = ojson::parse(body, nullptr, false);
    if (j.is_discarded()) {
        throw ProtocolError("endpoint '" + ep.id + "': response is not JSON");
    }
    try {
        if (ep.adapter == "council") {
            out.text = j.at("text").get<std::string>();
            if (j.contains("prompt_tokens")) out.prompt_tokens = j.at("prompt_tokens").get<int>();
            if (j.contains("completion_tokens")) {
                out.completion_tokens = j.at("completion_tokens").get<int>();
            }
        } else if (ep.adapter == "openai_chat") {
            out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
            if (j.contains("usage")) {
                out.prompt_tokens = j.at("usage").value("prompt_tokens", 0);
                out.completion_tokens = j.at("usage").value("completion_tokens", 0);
            }
        } else { // ollama
            out.text = j.at("message").at("content").get<std::string>();
        }
    } catch (const ojson::exception& e) {
        throw ProtocolError("endpoint '" + ep.id + "': unexpected payload shape: " + e.what());
    }
    return out.text;
}

} // namespace

GenerationResponse HttpProvider::attempt(const GenerationRequest& request) {
    WireCall call = encode(endpoint_, request);

    httplib::Client client(endpoint_.base_url);
    client.set_connection_timeout(endpoint_.connect_timeout_s, 0);
    client.set_read_timeout(endpoint_.read_timeout_s, 0);
    httplib::Headers headers;
    if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);

    auto started = std::chrono::steady_clock::now();
    httplib::Result result =
        client.Post(call.path, headers, call.body.dump(), "application/json");
    auto elapsed = std::chrono::steady_clock::now() - started;

    if (!result) {
        throw ProviderError("endpoint '" + endpoint_.id + "': transport failure (" +
                            httplib::to_string(result.error()) + ")");
    }
    if (result->status == 429 || result->status >= 500) {
        throw ProviderError("endpoint '" + endpoint_.id + "': HTTP " +
                            std::to_string(result->status));
    }
    if (result->status < 200 || result->status >= 300) {
        throw ProtocolError("endpoint '" + endpoint_.id + "': HTTP " +
                            std::to_string(result->status) + ": " + result->body);
    }

    GenerationResponse res;
    res.provider_id = id();
    res.model = request.model;
    res.latency_ms =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(elapsed).count();
    decode(endpoint_, result->body, res);
    return res;
}

GenerationResponse HttpProvider::do_generate(const GenerationRequest& request,
                                             const CallSite& site) {
    (void)site;
    gate_->acquire();
    struct Release {
        Gate* g;
        ~Release() { g->release(); }
    } release{gate_.get()};

    std::string last_error;
    int backoff = endpoint_.backoff_ms;
    for (int attempt = 1; attempt <= endpoint_.retries; ++attempt) {
        try {
            return this->attempt(request);
        } catch (const ProtocolError&) {
            throw; // malformed payloads and hard 4xx do not retry
        } catch (const ProviderError& e) {
            last_error = e.what();
            if (attempt < endpoint_.retries) {
                std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
                backoff *= 2;
            }
        }
    }
    throw ProviderError("endpoint '" + endpoint_.id + "': " + std::to_string(endpoint_.retries) +
                        " attempts failed; last: " + last_error);
}

} // namespace council
