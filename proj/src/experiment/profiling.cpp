#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "council/errors.hpp"
#include "council/experiment.hpp"
#include "council/rng.hpp"
#include "council/stats.hpp"

namespace council {

namespace {

constexpr const char* kProfilingSystem =
    "You are answering a short policy question. Answer in plain prose.";

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

// All word-boundary occurrences of `word` in `text`, both lowercase.
std::size_t count_occurrences(const std::string& text, const std::string& word) {
    std::size_t count = 0;
    std::size_t pos = 0;
    while ((pos = text.find(word, pos)) != std::string::npos) {
        bool left_ok = pos == 0 || !word_char(text[pos - 1]);
        std::size_t end = pos + word.size();
        bool right_ok = end == text.size() || !word_char(text[end]);
        if (left_ok && right_ok) ++count;
        pos += 1;
    }
    return count;
}

std::size_t word_count(const std::string& text) {
    std::istringstream in(text);
    std::string token;
    std::size_t n = 0;
    while (in >> token) ++n;
    return n;
}

} // namespace

double AlignmentMatrix::score(const std::string& model_id, const std::string& perspective) const {
    auto row = scores.find(model_id);
    if (row == scores.end()) {
        throw ConfigError("alignment matrix has no row for model '" + model_id + "'");
    }
    auto cell = row->second.find(perspective);
    if (cell == row->second.end()) {
        throw ConfigError("alignment matrix row '" + model_id + "' has no score for '" +
                          perspective + "'");
    }
    return cell->second;
}

AlignmentMatrix profile_models(const std::vector<ModelBinding>& models,
                               const std::map<std::string, ValuePerspective>& perspectives,
                               const std::vector<std::string>& battery, ProviderHub& hub,
                               std::uint64_t seed) {
    if (models.empty()) throw ConfigError("profiling needs at least one model");
    if (battery.empty()) throw ConfigError("profiling battery is empty");
    if (perspectives.empty()) throw ConfigError("profiling needs at least one perspective");
    for (const auto& [name, p] : perspectives) {
        if (p.keywords.empty()) {
            throw ConfigError("perspective '" + name + "' has no keywords to profile against");
        }
    }

    AlignmentMatrix matrix;
    for (const auto& [name, p] : perspectives) matrix.perspective_names.push_back(name);

    std::set<std::string> seen;
    for (std::size_t im = 0; im < models.size(); ++im) {
        const ModelBinding& binding = models[im];
        if (!seen.insert(binding.model).second) {
            throw ConfigError("duplicate model id '" + binding.model + "' in profiling set");
        }
        matrix.model_ids.push_back(binding.model);
        matrix.bindings[binding.model] = binding;
        Provider& provider = hub.get(binding.endpoint);
        std::uint64_t model_lane = derive_seed(seed, im);

        std::map<std::string, double> sums;
        std::size_t included = 0;
        std::size_t excluded = 0;
        for (std::size_t i = 0; i < battery.size(); ++i) {
            GenerationRequest request;
            request.model = binding.model;
            request.system = kProfilingSystem;
            request.user = battery[i];
            request.temperature = binding.temperature;
            request.seed = resolve_seed(binding, model_lane, i);
            CallSite site{"profiler", "profiling", static_cast<int>(i), binding.model};
            std::string text = provider.generate(request, site).text;

            std::size_t words = word_count(text);
            if (words == 0) {
                ++excluded;
                continue;
            }
            ++included;
            std::string haystack = lower(text);
            for (const auto& [name, p] : perspectives) {
                std::size_t hits = 0;
                for (const auto& keyword : p.keywords) {
                    hits += count_occurrences(haystack, lower(keyword));
                }
                sums[name] += static_cast<double>(hits) / static_cast<double>(words);
            }
        }
        matrix.excluded_prompts[binding.model] = excluded;
        if (included == 0) {
            throw DataError("model '" + binding.model +
                            "' returned empty responses for the whole battery");
        }
        for (const auto& [name, sum] : sums) {
            matrix.scores[binding.model][name] = sum / static_cast<double>(included);
        }
    }
    return matrix;
}

ojson to_json(const AlignmentMatrix& m) {
    ojson j;
    j["models"] = m.model_ids;
    j["perspectives"] = m.perspective_names;
    ojson scores = ojson::object();
    for (const auto& model : m.model_ids) {
        ojson row = ojson::object();
        for (const auto& p : m.perspective_names) row[p] = m.score(model, p);
        scores[model] = std::move(row);
    }
    j["scores"] = std::move(scores);
    ojson excluded = ojson::object();
    for (const auto& [model, n] : m.excluded_prompts) excluded[model] = n;
    j["excluded_prompts"] = std::move(excluded);
    ojson bindings = ojson::object();
    for (const auto& [model, binding] : m.bindings) bindings[model] = to_json(binding);
    j["bindings"] = std::move(bindings);
    return j;
}

AlignmentMatrix alignment_matrix_from_json(const ojson& j) {
    AlignmentMatrix m;
    for (const auto& v : require_field(j, "models", "alignment matrix")) {
        m.model_ids.push_back(v.get<std::string>());
    }
    for (const auto& v : require_field(j, "perspectives", "alignment matrix")) {
        m.perspective_names.push_back(v.get<std::string>());
    }
    const ojson& scores = require_field(j, "scores", "alignment matrix");
    for (const auto& model : m.model_ids) {
        const ojson& row = require_field(scores, model, "alignment matrix scores");
        for (const auto& p : m.perspective_names) {
            m.scores[model][p] = require_field(row, p, "alignment matrix row").get<double>();
        }
    }
    if (j.contains("excluded_prompts")) {
        for (const auto& [model, n] : j.at("excluded_prompts").items()) {
            m.excluded_prompts[model] = n.get<std::size_t>();
        }
    }
    if (j.contains("bindings")) {
        for (const auto& [model, b] : j.at("bindings").items()) {
            m.bindings[model] = model_binding_from_json(b);
        }
    }
    return m;
}

std::string to_markdown(const AlignmentMatrix& m) {
    std::ostringstream out;
    out << "| Model |";
    for (const auto& p : m.perspective_names) out << " " << p << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < m.perspective_names.size(); ++i) out << "---|";
    out << "\n";
    out.precision(4);
    out << std::fixed;
    for (const auto& model : m.model_ids) {
        out << "| " << model << " |";
        for (const auto& p : m.perspective_names) out << " " << m.score(model, p) << " |";
        out << "\n";
    }
    return out.str();
}

RoleAssignmentResult assign_roles(const AlignmentMatrix& matrix,
                                  const std::vector<AgentRole>& roles) {
    if (matrix.model_ids.empty()) throw ConfigError("alignment matrix has no models");
    RoleAssignmentResult result;
    std::set<std::string> tied_perspectives;
    for (const auto& role : roles) {
        const std::string& p = role.primary_perspective;
        std::string best;
        double best_score = 0.0;
        for (const auto& model : matrix.model_ids) {
            double s = matrix.score(model, p); // throws when the column is missing
            if (best.empty() || s > best_score) {
                best = model;
                best_score = s;
            } else if (s == best_score && model < best) {
                best = model;
            }
        }
        std::vector<std::string> winners;
        for (const auto& model : matrix.model_ids) {
            if (matrix.score(model, p) == best_score) winners.push_back(model);
        }
        if (winners.size() > 1 && tied_perspectives.insert(p).second) {
            std::sort(winners.begin(), winners.end());
            std::string note = "perspective " + p + ": " + winners[0];
            for (std::size_t i = 1; i < winners.size(); ++i) note += " == " + winners[i];
            note += ", chose " + best;
            result.ties.push_back(std::move(note));
        }
        auto binding = matrix.bindings.find(best);
        if (binding == matrix.bindings.end()) {
            throw ConfigError("alignment matrix has no binding for model '" + best + "'");
        }
        result.assignment[role.name] = binding->second;
    }
    return result;
}

ProfilingCorrelation profiling_coherence_correlation(
    const AlignmentMatrix& matrix, const ModelAssignment& assignment,
    const std::vector<AgentRole>& roles, const std::vector<DeliberationRecord>& c_records) {
    // mean coherence per evaluator role over every assessment in the records
    std::map<std::string, std::pair<double, std::size_t>> role_coherence;
    for (const auto& record : c_records) {
        if (!record.assessments) continue;
        for (const auto& a : *record.assessments) {
            auto& [sum, count] = role_coherence[a.role];
            sum += a.score;
            ++count;
        }
    }

    // group evaluator roles by primary perspective
    std::map<std::string, std::vector<const AgentRole*>> by_perspective;
    for (const auto& role : roles) {
        if (role.kind == RoleKind::Evaluator) {
            by_perspective[role.primary_perspective].push_back(&role);
        }
    }

    ProfilingCorrelation out;
    std::vector<double> xs, ys;
    for (const auto& [perspective, bearers] : by_perspective) {
        double sum = 0.0;
        std::size_t count = 0;
        std::string model;
        for (const AgentRole* role : bearers) {
            auto it = role_coherence.find(role->name);
            if (it != role_coherence.end()) {
                sum += it->second.first;
                count += it->second.second;
            }
            auto binding = assignment.find(role->name);
            if (binding == assignment.end()) {
                throw ConfigError("assignment is missing role '" + role->name + "'");
            }
            if (model.empty()) {
                model = binding->second.model;
            } else if (model != binding->second.model) {
                throw ConfigError("perspective '" + perspective +
                                  "' is served by multiple models; correlation is ill-defined");
            }
        }
        if (count == 0) continue; // no assessments for this perspective
        ProfilingCorrelationPoint point;
        point.perspective = perspective;
        point.model = model;
        point.profiling_score = matrix.score(model, perspective);
        point.mean_coherence = sum / static_cast<double>(count);
        xs.push_back(point.profiling_score);
        ys.push_back(point.mean_coherence);
        out.points.push_back(std::move(point));
    }

    if (out.points.size() < 3) {
        throw DataError("profiling correlation needs at least 3 perspectives with coherence "
                        "data, have " +
                        std::to_string(out.points.size()));
    }
    out.pearson_r = stats::pearson(xs, ys);
    out.p_value = stats::pearson_two_sided_p(out.pearson_r, xs.size());
    return out;
}

ojson to_json(const ProfilingCorrelation& c) {
    ojson points = ojson::array();
    for (const auto& p : c.points) {
        points.push_back(ojson{{"perspective", p.perspective},
                               {"model", p.model},
                               {"profiling_score", p.profiling_score},
                               {"mean_coherence", p.mean_coherence}});
    }
    return ojson{{"pearson_r", c.pearson_r}, {"p_value", c.p_value}, {"points", points}};
}

} // namespace council
