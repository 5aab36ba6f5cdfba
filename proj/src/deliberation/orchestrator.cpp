#include <sstream>

#include "council/deliberation.hpp"
#include "council/errors.hpp"
#include "council/rng.hpp"

namespace council {

namespace {

constexpr const char* kSystemPrompt =
    "You are a member of a structured policy deliberation council. Follow the instructions "
    "precisely and answer in plain text.";

// Disjoint seed lanes per pipeline stage, so adding a debate call never
// shifts the seeds of evaluation calls.
constexpr std::uint64_t kDebateLane = 0;
constexpr std::uint64_t kEvaluationLane = 1;

std::string positions_block(const Scenario& scenario,
                            const std::vector<TranscriptEntry>& positions) {
    std::ostringstream out;
    for (const auto& e : positions) {
        const PolicyOption* opt = scenario.find_option(e.target_option);
        out << "Champion " << e.role << ", for option " << e.target_option;
        if (opt) out << " (" << opt->name << ")";
        out << ":\n" << e.text << "\n\n";
    }
    std::string s = out.str();
    if (!s.empty()) s.resize(s.size() - 1);
    return s;
}

std::string critiques_block(const std::vector<TranscriptEntry>& critiques) {
    std::ostringstream out;
    for (const auto& e : critiques) {
        out << "Critique from " << e.role << ":\n" << e.text << "\n\n";
    }
    std::string s = out.str();
    if (!s.empty()) s.resize(s.size() - 1);
    return s;
}

} // namespace

std::string render_options_block(const Scenario& scenario) {
    std::ostringstream out;
    for (std::size_t i = 0; i < scenario.options.size(); ++i) {
        const auto& opt = scenario.options[i];
        out << opt.id << ". " << opt.name << "\n   " << opt.description;
        if (i + 1 < scenario.options.size()) out << '\n';
    }
    return out.str();
}

std::string render_transcript_block(const Scenario& scenario,
                                    const DebateTranscript& transcript) {
    std::ostringstream out;
    int current_round = 0;
    for (const auto& e : transcript.entries) {
        if (e.round != current_round) {
            if (current_round != 0) out << '\n';
            current_round = e.round;
            const char* title = e.round == 1   ? "Round 1: positions"
                                : e.round == 2 ? "Round 2: critiques"
                                               : "Round 3: defenses";
            out << "=== " << title << " ===\n\n";
        }
        const PolicyOption* opt = scenario.find_option(e.target_option);
        std::string option_label = e.target_option;
        if (opt) option_label += " (" + opt->name + ")";
        switch (e.kind) {
        case DebatePhase::Position:
            out << e.role << ", championing option " << option_label << ":\n";
            break;
        case DebatePhase::Critique:
            out << e.role << " critiques option " << option_label << ":\n";
            break;
        case DebatePhase::Defense:
            out << e.role << " defends option " << option_label << ":\n";
            break;
        }
        out << e.text << "\n\n";
    }
    std::string s = out.str();
    while (!s.empty() && s.back() == '\n') s.resize(s.size() - 1);
    return s;
}

std::optional<std::uint64_t> resolve_seed(const ModelBinding& binding, std::uint64_t run_seed,
                                          std::uint64_t call_sequence) {
    const std::string& policy = binding.seed_policy;
    if (policy == "derived") return derive_seed(run_seed, call_sequence);
    if (policy == "none") return std::nullopt;
    if (policy.rfind("fixed:", 0) == 0) {
        try {
            std::size_t used = 0;
            std::uint64_t v = std::stoull(policy.substr(6), &used);
            if (used != policy.size() - 6) throw std::invalid_argument("trailing text");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("seed policy '" + policy + "' is not 'fixed:<n>'");
        }
    }
    throw ConfigError("unknown seed policy '" + policy + "'");
}

std::size_t expected_transcript_entries(std::size_t option_count) {
    return option_count * (option_count + 1);
}

Deliberator::Deliberator(std::map<std::string, ValuePerspective> perspectives,
                         PromptTemplateSet templates, ProviderHub& hub, int max_parse_attempts)
    : perspectives_(std::move(perspectives)), templates_(std::move(templates)), hub_(&hub),
      max_parse_attempts_(max_parse_attempts) {
    templates_.validate();
    if (max_parse_attempts_ < 1) throw ConfigError("max_parse_attempts must be >= 1");
}

const ValuePerspective& Deliberator::perspective_of(const AgentRole& role) const {
    auto it = perspectives_.find(role.primary_perspective);
    if (it == perspectives_.end()) {
        throw ConfigError("role '" + role.name + "': perspective '" + role.primary_perspective +
                          "' is not defined");
    }
    return it->second;
}

const ModelBinding& Deliberator::binding_of(const AgentRole& role,
                                            const ModelAssignment& assignment) const {
    auto it = assignment.find(role.name);
    if (it == assignment.end()) {
        throw ConfigError("no model binding for role '" + role.name + "'");
    }
    return it->second;
}

GenerationRequest Deliberator::base_request(const AgentRole& role, const ModelBinding& binding,
                                            std::uint64_t lane_seed,
                                            std::uint64_t call_sequence) const {
    (void)role;
    GenerationRequest req;
    req.model = binding.model;
    req.system = kSystemPrompt;
    req.temperature = binding.temperature;
    req.seed = resolve_seed(binding, lane_seed, call_sequence);
    return req;
}

DebateOutcome Deliberator::run_debate(const Scenario& scenario,
                                      const std::vector<AgentRole>& champions,
                                      const ModelAssignment& assignment, std::uint64_t run_seed,
                                      int run_index) const {
    scenario.validate();
    const std::size_t k = scenario.option_count();
    if (champions.size() != k) {
        throw ConfigError("debate needs exactly " + std::to_string(k) + " champions, got " +
                          std::to_string(champions.size()));
    }

    // champion per option, in scenario option order
    std::vector<const AgentRole*> by_option(k, nullptr);
    for (const auto& champ : champions) {
        if (champ.kind != RoleKind::Champion || !champ.champion_option_id) {
            throw ConfigError("role '" + champ.name + "' is not a champion");
        }
        std::size_t idx = k;
        for (std::size_t i = 0; i < k; ++i) {
            if (scenario.options[i].id == *champ.champion_option_id) idx = i;
        }
        if (idx == k) {
            throw ConfigError("champion '" + champ.name + "' advocates unknown option '" +
                              *champ.champion_option_id + "'");
        }
        if (by_option[idx] != nullptr) {
            throw ConfigError("options '" + scenario.options[idx].id +
                              "' has two champions: '" + by_option[idx]->name + "' and '" +
                              champ.name + "'");
        }
        by_option[idx] = &champ;
    }
    for (std::size_t i = 0; i < k; ++i) {
        if (by_option[i] == nullptr) {
            throw ConfigError("option '" + scenario.options[i].id + "' has no champion");
        }
        perspective_of(*by_option[i]);   // fail fast on unresolved config
        binding_of(*by_option[i], assignment);
    }

    const std::uint64_t lane = derive_seed(run_seed, kDebateLane);
    const std::string options_block = render_options_block(scenario);
    DebateOutcome out;
    std::uint64_t sequence = 0;

    auto speak = [&](const AgentRole& role, const std::string& phase, const std::string& target,
                     const std::string& user) {
        const ModelBinding& binding = binding_of(role, assignment);
        GenerationRequest req = base_request(role, binding, lane, sequence++);
        req.user = user;
        CallSite site{role.name, phase, run_index, target};
        return hub_->get(binding.endpoint).generate(req, site);
    };

    try {
        for (std::size_t i = 0; i < k; ++i) {
            const AgentRole& champ = *by_option[i];
            const PolicyOption& own = scenario.options[i];
            const ValuePerspective& p = perspective_of(champ);
            std::string user = render_template(
                templates_.position,
                {{"role", champ.name},
                 {"perspective", p.name},
                 {"definition", p.definition},
                 {"question", scenario.question},
                 {"options", options_block},
                 {"option_id", own.id},
                 {"option_name", own.name},
                 {"option_description", own.description}});
            GenerationResponse res = speak(champ, "position", own.id, user);
            out.transcript.entries.push_back(
                TranscriptEntry{champ.name, 1, DebatePhase::Position, own.id, res.text});
        }

        const std::string positions = positions_block(scenario, out.transcript.entries);

        for (std::size_t i = 0; i < k; ++i) {
            const AgentRole& champ = *by_option[i];
            const PolicyOption& own = scenario.options[i];
            const ValuePerspective& p = perspective_of(champ);
            for (std::size_t j = 0; j < k; ++j) {
                if (j == i) continue;
                const PolicyOption& target = scenario.options[j];
                std::string user = render_template(
                    templates_.critique,
                    {{"role", champ.name},
                     {"perspective", p.name},
                     {"definition", p.definition},
                     {"question", scenario.question},
                     {"positions", positions},
                     {"target_option_id", target.id},
                     {"target_option_name", target.name},
                     {"own_option_id", own.id},
                     {"own_option_name", own.name}});
                GenerationResponse res = speak(champ, "critique", target.id, user);
                out.transcript.entries.push_back(
                    TranscriptEntry{champ.name, 2, DebatePhase::Critique, target.id, res.text});
            }
        }

        for (std::size_t i = 0; i < k; ++i) {
            const AgentRole& champ = *by_option[i];
            const PolicyOption& own = scenario.options[i];
            const ValuePerspective& p = perspective_of(champ);
            std::vector<TranscriptEntry> against;
            for (const auto& e : out.transcript.entries) {
                if (e.kind == DebatePhase::Critique && e.target_option == own.id) {
                    against.push_back(e);
                }
            }
            std::string user = render_template(
                templates_.defense,
                {{"role", champ.name},
                 {"perspective", p.name},
                 {"definition", p.definition},
                 {"question", scenario.question},
                 {"own_option_id", own.id},
                 {"own_option_name", own.name},
                 {"own_position", out.transcript.entries[i].text},
                 {"critiques", critiques_block(against)}});
            GenerationResponse res = speak(champ, "defense", own.id, user);
            out.transcript.entries.push_back(
                TranscriptEntry{champ.name, 3, DebatePhase::Defense, own.id, res.text});
        }
    } catch (const ProviderError& e) {
        out.failure = RunFailure{"debate", e.what()};
    } catch (const ProtocolError& e) {
        out.failure = RunFailure{"debate", e.what()};
    }
    return out;
}

EvaluationOutcome Deliberator::run_evaluation(const Scenario& scenario,
                                              const DebateTranscript& transcript,
                                              const std::vector<AgentRole>& evaluators,
                                              const ModelAssignment& assignment,
                                              std::uint64_t run_seed, int run_index) const {
    scenario.validate();
    if (transcript.entries.size() != expected_transcript_entries(scenario.option_count())) {
        throw DataError("evaluation requires a complete transcript (" +
                        std::to_string(expected_transcript_entries(scenario.option_count())) +
                        " entries, got " + std::to_string(transcript.entries.size()) + ")");
    }
    if (evaluators.empty()) throw ConfigError("no evaluators configured");
    for (const auto& evaluator : evaluators) {
        if (evaluator.kind != RoleKind::Evaluator) {
            throw ConfigError("role '" + evaluator.name + "' is not an evaluator");
        }
        perspective_of(evaluator);
        binding_of(evaluator, assignment);
    }

    const std::uint64_t lane = derive_seed(run_seed, kEvaluationLane);
    const std::string options_block = render_options_block(scenario);
    const std::string transcript_block = render_transcript_block(scenario, transcript);
    const std::string format_block = ranking_format_block(scenario.options);

    EvaluationOutcome out;
    for (std::size_t e = 0; e < evaluators.size(); ++e) {
        const AgentRole& evaluator = evaluators[e];
        const ValuePerspective& p = perspective_of(evaluator);
        const ModelBinding& binding = binding_of(evaluator, assignment);
        const std::string prompt =
            render_template(templates_.evaluation, {{"role", evaluator.name},
                                                    {"perspective", p.name},
                                                    {"definition", p.definition},
                                                    {"question", scenario.question},
                                                    {"options", options_block},
                                                    {"transcript", transcript_block},
                                                    {"format", format_block}});
        const std::string reminder =
            render_template(templates_.retry_suffix, {{"format", format_block}});

        std::string last_raw;
        std::string last_parse_error;
        bool done = false;
        for (int attempt = 1; attempt <= max_parse_attempts_ && !done; ++attempt) {
            GenerationRequest req = base_request(
                evaluator, binding, lane,
                e * static_cast<std::uint64_t>(max_parse_attempts_) + (attempt - 1));
            req.user = attempt == 1 ? prompt : prompt + "\n\n" + reminder;
            CallSite site{evaluator.name, "evaluation", run_index, ""};
            GenerationResponse res;
            try {
                res = hub_->get(binding.endpoint).generate(req, site);
            } catch (const ProviderError& err) {
                out.failure = RunFailure{"evaluation", evaluator.name + ": " + err.what()};
                return out;
            } catch (const ProtocolError& err) {
                out.failure = RunFailure{"evaluation", evaluator.name + ": " + err.what()};
                return out;
            }
            last_raw = res.text;
            try {
                ParsedRanking parsed = parse_ranking(res.text, scenario.options);
                EvaluationRecord record;
                record.role = evaluator.name;
                record.perspective = p.name;
                record.ranking = std::move(parsed.ranking);
                record.reasoning = std::move(parsed.reasoning);
                record.raw_response = res.text;
                record.parse_attempts = attempt;
                out.evaluations.push_back(std::move(record));
                done = true;
            } catch (const ParseError& err) {
                last_parse_error = err.what();
            }
        }
        if (!done) {
            out.failure = RunFailure{
                "evaluation", evaluator.name + ": unparseable after " +
                                  std::to_string(max_parse_attempts_) + " attempts (" +
                                  last_parse_error + "); raw response: " + last_raw};
            return out;
        }
    }
    return out;
}

} // namespace council
