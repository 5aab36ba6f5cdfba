#include <algorithm>
#include <cctype>
#include <sstream>

#include "council/deliberation.hpp"
#include "council/errors.hpp"

namespace council {

const std::vector<std::string>& ordinal_labels() {
    static const std::vector<std::string> labels = {"FIRST", "SECOND", "THIRD", "FOURTH",
                                                    "FIFTH", "SIXTH",  "SEVENTH", "EIGHTH",
                                                    "NINTH", "TENTH"};
    return labels;
}

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// "FIRST: A" -> label index 0, value "A"; nullopt for non-label lines.
std::optional<std::pair<std::size_t, std::string>> match_label_line(const std::string& line,
                                                                    std::size_t label_count) {
    std::string t = trim(line);
    std::string lt = lower(t);
    for (std::size_t i = 0; i < label_count; ++i) {
        const std::string label = lower(ordinal_labels()[i]);
        if (lt.rfind(label, 0) != 0) continue;
        std::size_t pos = label.size();
        while (pos < t.size() && (t[pos] == ' ' || t[pos] == '\t')) ++pos;
        if (pos >= t.size() || t[pos] != ':') continue;
        return std::make_pair(i, trim(t.substr(pos + 1)));
    }
    return std::nullopt;
}

const PolicyOption* resolve_option(const std::string& value,
                                   const std::vector<PolicyOption>& options) {
    std::string needle = lower(trim(value));
    for (const auto& opt : options) {
        if (lower(opt.id) == needle || lower(opt.name) == needle) return &opt;
    }
    return nullptr;
}

} // namespace

ParsedRanking parse_ranking(const std::string& text, const std::vector<PolicyOption>& options) {
    if (options.empty()) throw ConfigError("parse_ranking: empty option list");
    const std::size_t k = options.size();
    if (k > ordinal_labels().size()) {
        throw ConfigError("parse_ranking: more options than ordinal labels (" +
                          std::to_string(k) + " > " + std::to_string(ordinal_labels().size()) +
                          ")");
    }

    std::vector<std::string> slots(k);
    std::vector<bool> filled(k, false);
    std::string reasoning;
    bool has_reasoning = false;

    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        std::string lt = lower(t);
        if (lt.rfind("reasoning", 0) == 0) {
            std::size_t pos = 9;
            while (pos < t.size() && (t[pos] == ' ' || t[pos] == '\t')) ++pos;
            if (pos < t.size() && t[pos] == ':') {
                reasoning = trim(t.substr(pos + 1));
                std::string rest;
                std::ostringstream tail;
                while (std::getline(in, rest)) tail << '\n' << rest;
                reasoning = trim(reasoning + tail.str());
                has_reasoning = true;
                break;
            }
        }
        auto labeled = match_label_line(line, k);
        if (!labeled) continue;
        auto [idx, value] = *labeled;
        if (filled[idx]) {
            throw ParseError("ranking: duplicate " + ordinal_labels()[idx] + " line");
        }
        const PolicyOption* opt = resolve_option(value, options);
        if (opt == nullptr) {
            throw ParseError("ranking: unknown option '" + value + "' on " +
                             ordinal_labels()[idx] + " line");
        }
        slots[idx] = opt->id;
        filled[idx] = true;
    }

    for (std::size_t i = 0; i < k; ++i) {
        if (!filled[i]) throw ParseError("ranking: missing " + ordinal_labels()[i] + " line");
    }
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            if (slots[i] == slots[j]) {
                throw ParseError("ranking: option '" + slots[i] + "' listed more than once");
            }
        }
    }
    if (!has_reasoning) throw ParseError("ranking: missing REASONING line");
    if (reasoning.empty()) throw ParseError("ranking: REASONING line is empty");

    ParsedRanking out;
    out.ranking.option_ids = std::move(slots);
    out.reasoning = std::move(reasoning);
    return out;
}

std::string render_ranking(const Ranking& ranking, const std::string& reasoning) {
    std::ostringstream out;
    for (std::size_t i = 0; i < ranking.option_ids.size(); ++i) {
        out << ordinal_labels().at(i) << ": " << ranking.option_ids[i] << '\n';
    }
    out << "REASONING: " << reasoning;
    return out.str();
}

std::string ranking_format_block(const std::vector<PolicyOption>& options) {
    if (options.size() > ordinal_labels().size()) {
        throw ConfigError("format block: more options than ordinal labels");
    }
    std::ostringstream out;
    for (std::size_t i = 0; i < options.size(); ++i) {
        out << ordinal_labels()[i] << ": <option id or name>\n";
    }
    out << "REASONING: <your reasoning, grounded in your value perspective>";
    return out.str();
}

} // namespace council
