#include "council/types.hpp"

#include <algorithm>
#include <set>

#include "council/errors.hpp"

namespace council {

const PolicyOption* Scenario::find_option(const std::string& option_id) const {
    for (const auto& opt : options) {
        if (opt.id == option_id) return &opt;
    }
    return nullptr;
}

void Scenario::validate() const {
    if (id.empty()) throw ConfigError("scenario: id is empty");
    if (question.empty()) throw ConfigError("scenario '" + id + "': question is empty");
    if (options.size() < 2) {
        throw ConfigError("scenario '" + id + "': needs at least 2 options, has " +
                          std::to_string(options.size()));
    }
    if (options.size() > 10) {
        // Rank lines are spelled FIRST..TENTH; more options than that has no
        // prompt format.
        throw ConfigError("scenario '" + id + "': more than 10 options is unsupported");
    }
    std::set<std::string> ids;
    for (const auto& opt : options) {
        if (opt.id.empty()) throw ConfigError("scenario '" + id + "': option with empty id");
        if (opt.name.empty() || opt.description.empty()) {
            throw ConfigError("scenario '" + id + "': option '" + opt.id +
                              "' needs a non-empty name and description");
        }
        if (!ids.insert(opt.id).second) {
            throw ConfigError("scenario '" + id + "': duplicate option id '" + opt.id + "'");
        }
    }
}

namespace {

// Index in tie_break, or npos when absent.
std::size_t tie_break_rank(const std::vector<std::string>& tie_break, const std::string& name) {
    for (std::size_t i = 0; i < tie_break.size(); ++i) {
        if (tie_break[i] == name) return i;
    }
    return static_cast<std::size_t>(-1);
}

// Perspectives carrying the maximum weight among `weights`, max first by the
// tie_break ordering.
std::string pick_max(const std::map<std::string, double>& weights,
                     const std::vector<std::string>& tie_break) {
    double best = -1.0;
    for (const auto& [name, w] : weights) {
        best = std::max(best, w);
    }
    std::vector<std::string> tied;
    for (const auto& [name, w] : weights) {
        if (w == best) tied.push_back(name);
    }
    if (tied.size() == 1) return tied.front();

    std::string winner;
    std::size_t winner_rank = static_cast<std::size_t>(-1);
    for (const auto& name : tied) {
        std::size_t rank = tie_break_rank(tie_break, name);
        if (rank == static_cast<std::size_t>(-1)) {
            throw ConfigError("trait tie between perspectives not covered by the tie_break "
                              "list: '" + name + "' has no tie_break entry");
        }
        if (winner.empty() || rank < winner_rank) {
            winner = name;
            winner_rank = rank;
        }
    }
    return winner;
}

} // namespace

std::string resolve_primary_perspective(const std::map<std::string, double>& trait_weights,
                                        const std::vector<std::string>& tie_break) {
    std::map<std::string, double> positive;
    for (const auto& [name, w] : trait_weights) {
        if (w < 0.0 || w > 1.0) {
            throw ConfigError("trait weight for '" + name + "' outside [0,1]: " +
                              std::to_string(w));
        }
        if (w > 0.0) positive.emplace(name, w);
    }
    if (positive.empty()) {
        throw ConfigError("role has no positive trait weight; cannot resolve a perspective");
    }
    return pick_max(positive, tie_break);
}

std::optional<std::string> resolve_secondary_perspective(
    const std::map<std::string, double>& trait_weights,
    const std::vector<std::string>& tie_break) {
    std::string primary = resolve_primary_perspective(trait_weights, tie_break);
    std::map<std::string, double> rest;
    for (const auto& [name, w] : trait_weights) {
        if (w > 0.0 && name != primary) rest.emplace(name, w);
    }
    if (rest.empty()) return std::nullopt;
    return pick_max(rest, tie_break);
}

std::size_t Ranking::position_of(const std::string& option_id) const {
    for (std::size_t i = 0; i < option_ids.size(); ++i) {
        if (option_ids[i] == option_id) return i;
    }
    throw DataError("ranking does not contain option '" + option_id + "'");
}

void Ranking::validate_against(const std::vector<PolicyOption>& options) const {
    if (option_ids.size() != options.size()) {
        throw DataError("ranking length " + std::to_string(option_ids.size()) +
                        " does not match option count " + std::to_string(options.size()));
    }
    std::set<std::string> seen;
    for (const auto& id : option_ids) {
        if (!seen.insert(id).second) throw DataError("ranking repeats option '" + id + "'");
        bool known = std::any_of(options.begin(), options.end(),
                                 [&](const PolicyOption& o) { return o.id == id; });
        if (!known) throw DataError("ranking names unknown option '" + id + "'");
    }
}

std::string to_string(ExperimentState s) {
    switch (s) {
        case ExperimentState::A: return "A";
        case ExperimentState::B: return "B";
        case ExperimentState::C: return "C";
    }
    return "?";
}

ExperimentState state_from_string(const std::string& s) {
    if (s == "A") return ExperimentState::A;
    if (s == "B") return ExperimentState::B;
    if (s == "C") return ExperimentState::C;
    throw ConfigError("unknown experimental state '" + s + "' (expected A, B or C)");
}

void AnalysisConfig::validate(std::size_t option_count) const {
    if (alpha <= 0.0 || alpha >= 1.0) throw ConfigError("analysis: alpha outside (0,1)");
    if (bonferroni_alpha <= 0.0 || bonferroni_alpha > alpha) {
        throw ConfigError("analysis: bonferroni_alpha must be in (0, alpha]");
    }
    if (bootstrap_resamples < 1) throw ConfigError("analysis: bootstrap_resamples < 1");
    if (coherence_threshold < 0.0 || coherence_threshold > 1.0) {
        throw ConfigError("analysis: coherence_threshold outside [0,1]");
    }
    if (borda_points.size() != option_count) {
        throw ConfigError("analysis: borda_points length " + std::to_string(borda_points.size()) +
                          " does not match option count " + std::to_string(option_count));
    }
    for (std::size_t i = 0; i < borda_points.size(); ++i) {
        if (borda_points[i] < 0.0) throw ConfigError("analysis: borda_points must be non-negative");
        if (i > 0 && borda_points[i] >= borda_points[i - 1]) {
            throw ConfigError("analysis: borda_points must be strictly decreasing");
        }
    }
    if (!(effect_bands.small_r < effect_bands.medium_r &&
          effect_bands.medium_r < effect_bands.large_r)) {
        throw ConfigError("analysis: effect bands must be ordered small < medium < large");
    }
    if (stat_method != "auto" && stat_method != "exact" && stat_method != "approx") {
        throw ConfigError("analysis: stat_method must be auto, exact, or approx");
    }
}

} // namespace council
