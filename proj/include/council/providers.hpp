#pragma once

// Text-generation backends. A Provider validates requests, counts backend
// calls, and dispatches to its transport: scripted (deterministic replay for
// tests and CI), HTTP (local inference servers and hosted APIs behind thin
// adapters), or a content-addressed cache wrapping another provider.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "council/json_io.hpp"

namespace council {

struct GenerationRequest {
    std::string model;
    std::string system;
    std::string user;
    double temperature = 0.7;
    std::optional<std::uint64_t> seed;
    int max_tokens = 1024;
};

struct GenerationResponse {
    std::string text;
    std::string provider_id;
    std::string model;
    double latency_ms = 0.0;
    std::optional<int> prompt_tokens;
    std::optional<int> completion_tokens;
};

// Where in the pipeline a request originates. Carries no prompt content; the
// scripted provider keys on it and audits capture it alongside the request.
struct CallSite {
    std::string role;
    std::string phase; // position | critique | defense | evaluation | validation | profiling
    int run_index = -1;
    std::string target; // critiqued option, judged role, or empty
};

// Stable content hash over (model, system, user, temperature, seed,
// max_tokens); independent of process and field ordering.
std::string cache_key(const GenerationRequest& request);

ojson to_json(const GenerationRequest& request);
GenerationRequest generation_request_from_json(const ojson& j);

class RequestObserver {
  public:
    virtual ~RequestObserver() = default;
    virtual void on_request(const std::string& provider_id, const GenerationRequest& request,
                            const CallSite& site) = 0;
};

class Provider {
  public:
    explicit Provider(std::string id) : id_(std::move(id)) {}
    virtual ~Provider() = default;

    const std::string& id() const { return id_; }

    // Validates the request, notifies the observer, counts the call, then
    // dispatches. Safe for concurrent invocation when the transport is.
    GenerationResponse generate(const GenerationRequest& request, const CallSite& site = {});

    // Number of generate() calls that reached this provider's transport.
    std::uint64_t calls() const { return calls_.load(); }

    void set_observer(RequestObserver* observer) { observer_ = observer; }

  protected:
    virtual GenerationResponse do_generate(const GenerationRequest& request,
                                           const CallSite& site) = 0;

  private:
    std::string id_;
    std::atomic<std::uint64_t> calls_{0};
    RequestObserver* observer_ = nullptr;
};

// ---------------------------------------------------------------------------
// Scripted provider
// ---------------------------------------------------------------------------

// A match rule; empty string / -1 fields match anything. Rules with more
// bound fields win; ties go to the earliest rule. Each rule carries a
// response sequence and repeats its last entry once exhausted.
struct ScriptRule {
    std::string role;
    std::string phase;
    int run = -1;
    std::string target;
    std::string model;
    std::vector<std::string> responses;
};

class ScriptedProvider : public Provider {
  public:
    explicit ScriptedProvider(std::string id = "scripted") : Provider(std::move(id)) {}

    void add_rule(ScriptRule rule);

    // {"rules": [{role?, phase?, run?, target?, model?, responses|response}]}
    static std::shared_ptr<ScriptedProvider> from_json(const ojson& script,
                                                       const std::string& id = "scripted");
    static std::shared_ptr<ScriptedProvider> from_file(const std::filesystem::path& path,
                                                       const std::string& id = "scripted");

  protected:
    GenerationResponse do_generate(const GenerationRequest& request,
                                   const CallSite& site) override;

  private:
    struct RuleState {
        ScriptRule rule;
        std::size_t next = 0;
    };
    std::mutex mutex_;
    std::vector<RuleState> rules_;
};

// ---------------------------------------------------------------------------
// HTTP provider
// ---------------------------------------------------------------------------

struct HttpEndpoint {
    std::string id;
    std::string base_url;          // scheme://host[:port]
    std::string adapter = "council"; // council | openai_chat | ollama
    std::string auth_env;          // env var holding the bearer token, or empty
    int max_in_flight = 2;
    int retries = 3;
    int backoff_ms = 1000; // doubles per attempt
    int connect_timeout_s = 5;
    int read_timeout_s = 120;
};

class HttpProvider : public Provider {
  public:
    explicit HttpProvider(HttpEndpoint endpoint);

    const HttpEndpoint& endpoint() const { return endpoint_; }

  protected:
    GenerationResponse do_generate(const GenerationRequest& request,
                                   const CallSite& site) override;

  private:
    GenerationResponse attempt(const GenerationRequest& request);

    HttpEndpoint endpoint_;
    std::string token_; // resolved once at construction
    class Gate;
    std::shared_ptr<Gate> gate_;
};

// ---------------------------------------------------------------------------
// Caching provider
// ---------------------------------------------------------------------------

// Append-only directory of <cache_key>.json files. A hit never touches the
// inner provider; a miss generates, then writes atomically (temp + rename)
// and never overwrites an existing entry.
class CachingProvider : public Provider {
  public:
    CachingProvider(std::shared_ptr<Provider> inner, std::filesystem::path dir);

    std::uint64_t hits() const { return hits_.load(); }
    std::uint64_t misses() const { return misses_.load(); }
    Provider& inner() { return *inner_; }

  protected:
    GenerationResponse do_generate(const GenerationRequest& request,
                                   const CallSite& site) override;

  private:
    std::shared_ptr<Provider> inner_;
    std::filesystem::path dir_;
    std::atomic<std::uint64_t> hits_{0};
    std::atomic<std::uint64_t> misses_{0};
};

// ---------------------------------------------------------------------------
// Hub
// ---------------------------------------------------------------------------

class ProviderHub {
  public:
    void add(const std::string& endpoint_id, std::shared_ptr<Provider> provider);
    bool has(const std::string& endpoint_id) const;
    Provider& get(const std::string& endpoint_id) const; // throws ConfigError when absent
    std::shared_ptr<Provider> get_ptr(const std::string& endpoint_id) const;

    // Observer applied to every registered provider, current and future.
    void set_observer(RequestObserver* observer);

    std::vector<std::string> endpoint_ids() const;

  private:
    std::map<std::string, std::shared_ptr<Provider>> providers_;
    RequestObserver* observer_ = nullptr;
};

} // namespace council
