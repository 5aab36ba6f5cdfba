#include "council/errors.hpp"
#include "council/providers.hpp"

namespace council {

void ProviderHub::add(const std::string& endpoint_id, std::shared_ptr<Provider> provider) {
    if (!provider) throw ConfigError("hub: null provider for endpoint '" + endpoint_id + "'");
    provider->set_observer(observer_);
    providers_[endpoint_id] = std::move(provider);
}

bool ProviderHub::has(const std::string& endpoint_id) const {
    return providers_.count(endpoint_id) > 0;
}

Provider& ProviderHub::get(const std::string& endpoint_id) const {
    auto it = providers_.find(endpoint_id);
    if (it == providers_.end()) {
        throw ConfigError("no provider registered for endpoint '" + endpoint_id + "'");
    }
    return *it->second;
}

std::shared_ptr<Provider> ProviderHub::get_ptr(const std::string& endpoint_id) const {
    auto it = providers_.find(endpoint_id);
    if (it == providers_.end()) {
        throw ConfigError("no provider registered for endpoint '" + endpoint_id + "'");
    }
    return it->second;
}

void ProviderHub::set_observer(RequestObserver* observer) {
    observer_ = observer;
    for (auto& [id, p] : providers_) p->set_observer(observer);
}

std::vector<std::string> ProviderHub::endpoint_ids() const {
    std::vector<std::string> ids;
    for (const auto& [id, p] : providers_) ids.push_back(id);
    return ids;
}

} // namespace council
