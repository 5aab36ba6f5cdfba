#include <algorithm>
#include <cctype>
#include <cstdio>

#include "council/delphi.hpp"
#include "council/errors.hpp"

namespace council {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

bool contains_word(const std::string& hay, const std::string& needle) {
    if (needle.empty()) return false;
    std::size_t from = 0;
    while (true) {
        std::size_t at = hay.find(needle, from);
        if (at == std::string::npos) return false;
        bool left_ok = at == 0 || !word_char(hay[at - 1]);
        std::size_t after = at + needle.size();
        bool right_ok = after >= hay.size() || !word_char(hay[after]);
        if (left_ok && right_ok) return true;
        from = at + 1;
    }
}

} // namespace

double keyword_overlap_score(const ValuePerspective& perspective, const std::string& reasoning) {
    if (perspective.keywords.empty()) {
        throw ConfigError("perspective '" + perspective.name + "' has no keywords to judge by");
    }
    const std::string text = lower(reasoning);
    std::size_t matched = 0;
    std::vector<std::string> seen;
    for (const auto& kw : perspective.keywords) {
        std::string k = lower(kw);
        if (std::find(seen.begin(), seen.end(), k) != seen.end()) continue;
        seen.push_back(k);
        if (contains_word(text, k)) ++matched;
    }
    return static_cast<double>(matched) / static_cast<double>(seen.size());
}

KeywordJudgeProvider::KeywordJudgeProvider(std::map<std::string, ValuePerspective> perspectives,
                                           std::string id)
    : Provider(std::move(id)), perspectives_(std::move(perspectives)) {
    if (perspectives_.empty()) throw ConfigError("keyword judge: no perspectives configured");
}

GenerationResponse KeywordJudgeProvider::do_generate(const GenerationRequest& request,
                                                     const CallSite& site) {
    (void)site;
    ParsedValidationRequest parsed = parse_validation_request_text(request.user);
    auto it = perspectives_.find(parsed.perspective_name);
    if (it == perspectives_.end()) {
        throw ProviderError("keyword judge: unknown perspective '" + parsed.perspective_name +
                            "'");
    }
    double score = keyword_overlap_score(it->second, parsed.reasoning);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "SCORE: %.6f", score);

    GenerationResponse res;
    res.text = buf;
    res.provider_id = id();
    res.model = request.model;
    return res;
}

} // namespace council
