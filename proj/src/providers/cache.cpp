#include <fstream>
#include <random>

#include "council/errors.hpp"
#include "council/providers.hpp"
#include "council/rng.hpp"

namespace council {

CachingProvider::CachingProvider(std::shared_ptr<Provider> inner, std::filesystem::path dir)
    : Provider(inner ? "cache:" + inner->id() : "cache"), inner_(std::move(inner)),
      dir_(std::move(dir)) {
    if (!inner_) throw ConfigError("cache: inner provider is null");
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cache: cannot create " + dir_.string() + ": " + ec.message());
}

GenerationResponse CachingProvider::do_generate(const GenerationRequest& request,
                                                const CallSite& site) {
    std::string key = cache_key(request);
    std::filesystem::path entry = dir_ / (key + ".json");

    if (std::filesystem::exists(entry)) {
        std::ifstream in(entry);
        ojson j;
        try {
            in >> j;
        } catch (const std::exception& e) {
            throw IoError("cache: corrupt entry " + entry.string() + ": " + e.what());
        }
        const ojson& r = require_field(j, "response", "cache entry");
        GenerationResponse res;
        res.text = require_field(r, "text", "cache entry").get<std::string>();
        res.provider_id = r.value("provider_id", inner_->id());
        res.model = r.value("model", request.model);
        res.latency_ms = 0.0;
        hits_.fetch_add(1);
        return res;
    }

    GenerationResponse res = inner_->generate(request, site);
    misses_.fetch_add(1);

    ojson j{{"key", key},
            {"request", to_json(request)},
            {"response", ojson{{"text", res.text},
                               {"provider_id", res.provider_id},
                               {"model", res.model}}}};

    // Atomic publish; append-only, so a concurrent identical write wins
    // harmlessly and an existing entry is never replaced.
    std::filesystem::path tmp =
        dir_ / (key + ".tmp-" + std::to_string(SplitMix64(std::random_device{}()).next() & 0xFFFFFF));
    {
        std::ofstream out(tmp);
        if (!out) throw IoError("cache: cannot write " + tmp.string());
        out << j.dump(2) << '\n';
    }
    std::error_code ec;
    if (std::filesystem::exists(entry)) {
        std::filesystem::remove(tmp, ec);
    } else {
        std::filesystem::rename(tmp, entry, ec);
        if (ec) {
            std::filesystem::remove(tmp);
            throw IoError("cache: cannot publish " + entry.string() + ": " + ec.message());
        }
    }
    return res;
}

} // namespace council
