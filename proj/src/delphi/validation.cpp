#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "council/deliberation.hpp"
#include "council/delphi.hpp"
#include "council/errors.hpp"
#include "council/hash.hpp"
#include "council/rng.hpp"

namespace council {

namespace {

constexpr const char* kPerspectiveMarker = "PERSPECTIVE: ";
constexpr const char* kDefinitionMarker = "DEFINITION: ";
constexpr const char* kAnchorsMarker = "CALIBRATION ANCHORS:";
constexpr const char* kReasoningMarker = "REASONING TO ASSESS:";
constexpr const char* kInstruction =
    "Assess how coherently the reasoning above reflects the stated perspective, using the "
    "calibration anchors as reference points. Reply with a single line:\n"
    "SCORE: <decimal between 0.0 and 1.0>";
constexpr const char* kJudgeSystem =
    "You are an impartial judge of reasoning coherence. Follow the instructions precisely.";
constexpr const char* kScoreReminder =
    "Your previous reply could not be used. Reply with a single line containing only "
    "'SCORE: <decimal between 0.0 and 1.0>'.";

// Validation requests and retest repetitions draw seeds from their own lanes
// (debate = 0, evaluation = 1).
constexpr std::uint64_t kValidationLane = 2;

std::string format_score(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

std::vector<CalibrationAnchor> default_calibration_anchors() {
    return {
        {"This option wins because everyone can see it is simply the best choice overall.", 0.2},
        {"The plan performs well on cost, and beyond that it just feels like the right call.",
         0.5},
        {"Ranked first because it minimizes irreversible failure modes, which my perspective "
         "treats as the decisive criterion.",
         0.9},
    };
}

ojson to_json(const std::vector<CalibrationAnchor>& anchors) {
    ojson arr = ojson::array();
    for (const auto& a : anchors) arr.push_back(ojson{{"snippet", a.snippet}, {"score", a.score}});
    return arr;
}

std::vector<CalibrationAnchor> anchors_from_json(const ojson& j) {
    if (!j.is_array()) throw ConfigError("calibration anchors must be an array");
    std::vector<CalibrationAnchor> out;
    for (const auto& e : j) {
        CalibrationAnchor a;
        a.snippet = require_field(e, "snippet", "calibration anchor").get<std::string>();
        a.score = require_field(e, "score", "calibration anchor").get<double>();
        if (!(a.score >= 0.0 && a.score <= 1.0)) {
            throw ConfigError("calibration anchor score outside [0,1]");
        }
        if (a.snippet.empty()) throw ConfigError("calibration anchor snippet is empty");
        out.push_back(std::move(a));
    }
    return out;
}

ValidationRequest build_validation_request(const ValuePerspective& perspective,
                                           const std::string& reasoning,
                                           const std::vector<CalibrationAnchor>& anchors) {
    if (reasoning.empty()) throw DataError("validation request: reasoning is empty");
    if (perspective.name.empty() || perspective.definition.empty()) {
        throw ConfigError("validation request: perspective lacks name or definition");
    }
    ValidationRequest r;
    r.perspective_name = perspective.name;
    r.perspective_definition = perspective.definition;
    r.reasoning = reasoning;
    r.anchors = anchors;

    std::ostringstream text;
    text << kPerspectiveMarker << perspective.name << '\n';
    text << kDefinitionMarker << perspective.definition << '\n';
    text << kAnchorsMarker << '\n';
    for (const auto& a : anchors) {
        text << "- SCORE " << format_score(a.score) << ": " << a.snippet << '\n';
    }
    text << kReasoningMarker << '\n' << reasoning << "\n\n" << kInstruction;
    r.text = text.str();
    r.fingerprint = fnv1a64_hex(r.text);
    return r;
}

ParsedValidationRequest parse_validation_request_text(const std::string& text) {
    auto field_after = [&](const char* marker) -> std::string {
        std::size_t at = text.find(marker);
        if (at == std::string::npos) {
            throw ProtocolError(std::string("validation request: marker '") + marker +
                                "' not found");
        }
        std::size_t start = at + std::string(marker).size();
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        return trim(text.substr(start, end - start));
    };
    ParsedValidationRequest out;
    out.perspective_name = field_after(kPerspectiveMarker);
    out.definition = field_after(kDefinitionMarker);

    std::size_t at = text.find(kReasoningMarker);
    if (at == std::string::npos) {
        throw ProtocolError("validation request: reasoning marker not found");
    }
    std::size_t start = at + std::string(kReasoningMarker).size();
    std::size_t end = text.find(std::string("\n\n") + kInstruction, start);
    if (end == std::string::npos) end = text.size();
    out.reasoning = trim(text.substr(start, end - start));
    return out;
}

double parse_score_line(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.size() < 6) continue;
        std::string head = t.substr(0, 5);
        for (auto& c : head) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (head != "score") continue;
        std::size_t pos = 5;
        while (pos < t.size() && (t[pos] == ' ' || t[pos] == '\t')) ++pos;
        if (pos >= t.size() || t[pos] != ':') continue;
        std::string value = trim(t.substr(pos + 1));
        double v = 0.0;
        try {
            std::size_t used = 0;
            v = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument("trailing text");
        } catch (const std::exception&) {
            throw ValidationError("judge reply has an unparseable SCORE value: '" + value + "'");
        }
        if (std::isnan(v) || v < 0.0 || v > 1.0) {
            throw ValidationError("judge score " + value + " outside [0,1]");
        }
        return v;
    }
    throw ValidationError("judge reply contains no SCORE line");
}

CoherenceJudge::CoherenceJudge(ModelBinding binding, std::vector<CalibrationAnchor> anchors,
                               ProviderHub& hub, int max_attempts)
    : binding_(std::move(binding)), anchors_(std::move(anchors)), hub_(&hub),
      max_attempts_(max_attempts) {
    if (max_attempts_ < 1) throw ConfigError("judge max_attempts must be >= 1");
    if (anchors_.empty()) throw ConfigError("judge requires calibration anchors");
    hub_->get(binding_.endpoint); // fail fast on unknown endpoint
}

CoherenceAssessment CoherenceJudge::score(const ValidationRequest& request,
                                          const std::string& role, std::uint64_t seed_lane,
                                          std::uint64_t call_base, int run_index) const {
    std::string last_error;
    std::string last_raw;
    for (int attempt = 1; attempt <= max_attempts_; ++attempt) {
        GenerationRequest req;
        req.model = binding_.model;
        req.system = kJudgeSystem;
        req.temperature = binding_.temperature;
        req.seed = resolve_seed(binding_, seed_lane, call_base + (attempt - 1));
        req.user = attempt == 1 ? request.text
                                : request.text + "\n\n" + kScoreReminder;
        CallSite site{role, "validation", run_index, role};
        GenerationResponse res = hub_->get(binding_.endpoint).generate(req, site);
        last_raw = res.text;
        try {
            double v = parse_score_line(res.text);
            CoherenceAssessment a;
            a.role = role;
            a.score = v;
            a.judge = judge_id();
            a.raw_response = res.text;
            a.request_fingerprint = request.fingerprint;
            return a;
        } catch (const ValidationError& e) {
            last_error = e.what();
        }
    }
    throw ValidationError("coherence judging failed for role '" + role + "' after " +
                          std::to_string(max_attempts_) + " attempts (" + last_error +
                          "); last reply: " + last_raw);
}

DeliberationRecord validate_run(const DeliberationRecord& record, const CoherenceJudge& judge,
                                const std::map<std::string, ValuePerspective>& perspectives,
                                const std::string& new_run_id, int run_index) {
    if (record.state != ExperimentState::B) {
        throw DataError("validate_run: record '" + record.run_id + "' is not a state-B run");
    }
    if (record.status != RunStatus::Completed) {
        throw DataError("validate_run: record '" + record.run_id + "' is not completed");
    }
    if (record.evaluations.empty()) {
        throw DataError("validate_run: record '" + record.run_id + "' has no evaluations");
    }

    const std::uint64_t lane = derive_seed(record.run_seed, kValidationLane);
    std::vector<CoherenceAssessment> assessments;
    std::vector<std::string> failures;
    for (std::size_t i = 0; i < record.evaluations.size(); ++i) {
        const EvaluationRecord& ev = record.evaluations[i];
        auto it = perspectives.find(ev.perspective);
        if (it == perspectives.end()) {
            throw ConfigError("validate_run: perspective '" + ev.perspective +
                              "' of role '" + ev.role + "' is not defined");
        }
        ValidationRequest request =
            build_validation_request(it->second, ev.reasoning, judge.anchors());
        try {
            assessments.push_back(
                judge.score(request, ev.role, lane,
                            i * static_cast<std::uint64_t>(judge.max_attempts()), run_index));
        } catch (const ValidationError& e) {
            failures.push_back(ev.role + ": " + e.what());
        } catch (const ProviderError& e) {
            failures.push_back(ev.role + ": " + e.what());
        } catch (const ProtocolError& e) {
            failures.push_back(ev.role + ": " + e.what());
        }
    }

    DeliberationRecord out = record;
    out.run_id = new_run_id;
    out.state = ExperimentState::C;
    out.parent_run_id = record.run_id;
    out.assessments = std::move(assessments);
    out.created = utc_timestamp_now();
    if (!failures.empty()) {
        out.status = RunStatus::PartialValidation;
        std::string msg = "coherence validation failed for ";
        for (std::size_t i = 0; i < failures.size(); ++i) {
            if (i) msg += "; ";
            msg += failures[i];
        }
        out.failure = RunFailure{"validation", msg};
    } else {
        out.status = RunStatus::Completed;
        out.failure.reset();
    }
    return out;
}

} // namespace council
