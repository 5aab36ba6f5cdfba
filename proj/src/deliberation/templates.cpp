#include <fstream>
#include <set>
#include <sstream>

#include "council/deliberation.hpp"
#include "council/errors.hpp"
#include "council/hash.hpp"

namespace council {

namespace {

bool placeholder_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

// Shared scanner: emits literal text into `out` (when non-null) and reports
// each placeholder name via `on_name`.
template <typename Fn>
void scan_template(const std::string& tmpl, std::string* out, Fn on_name) {
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        char c = tmpl[i];
        if (c == '{') {
            if (i + 1 < tmpl.size() && tmpl[i + 1] == '{') {
                if (out) out->push_back('{');
                ++i;
                continue;
            }
            std::size_t j = i + 1;
            while (j < tmpl.size() && placeholder_char(tmpl[j])) ++j;
            if (j >= tmpl.size() || tmpl[j] != '}' || j == i + 1) {
                throw ConfigError("template: unterminated or empty placeholder near offset " +
                                  std::to_string(i));
            }
            on_name(tmpl.substr(i + 1, j - i - 1));
            i = j;
        } else if (c == '}') {
            if (i + 1 < tmpl.size() && tmpl[i + 1] == '}') {
                if (out) out->push_back('}');
                ++i;
                continue;
            }
            throw ConfigError("template: stray '}' at offset " + std::to_string(i));
        } else if (out) {
            out->push_back(c);
        }
    }
}

} // namespace

std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    scan_template(tmpl, &out, [&](const std::string& name) {
        auto it = values.find(name);
        if (it == values.end()) {
            throw ConfigError("template: no value supplied for placeholder {" + name + "}");
        }
        out += it->second;
    });
    return out;
}

std::vector<std::string> template_placeholders(const std::string& tmpl) {
    std::vector<std::string> names;
    scan_template(tmpl, nullptr, [&](const std::string& name) {
        for (const auto& seen : names) {
            if (seen == name) return;
        }
        names.push_back(name);
    });
    return names;
}

namespace {

struct SlotSpec {
    const char* slot;
    std::set<std::string> allowed;
    std::set<std::string> required;
};

const std::vector<SlotSpec>& slot_specs() {
    static const std::vector<SlotSpec> specs = {
        {"position",
         {"role", "perspective", "definition", "question", "options", "option_id", "option_name",
          "option_description"},
         {"question", "definition", "option_name", "option_description"}},
        {"critique",
         {"role", "perspective", "definition", "question", "positions", "target_option_id",
          "target_option_name", "own_option_id", "own_option_name"},
         {"question", "definition", "positions", "target_option_name"}},
        {"defense",
         {"role", "perspective", "definition", "question", "own_option_id", "own_option_name",
          "own_position", "critiques"},
         {"question", "definition", "own_position", "critiques"}},
        {"evaluation",
         {"role", "perspective", "definition", "question", "options", "transcript", "format"},
         {"question", "definition", "options", "transcript", "format"}},
        {"retry_suffix", {"format"}, {"format"}},
    };
    return specs;
}

void validate_slot(const std::string& tmpl, const SlotSpec& spec) {
    if (tmpl.empty()) throw ConfigError("template '" + std::string(spec.slot) + "' is empty");
    std::set<std::string> present;
    for (const auto& name : template_placeholders(tmpl)) {
        if (!spec.allowed.count(name)) {
            throw ConfigError("template '" + std::string(spec.slot) +
                              "': unknown placeholder {" + name + "}");
        }
        present.insert(name);
    }
    for (const auto& name : spec.required) {
        if (!present.count(name)) {
            throw ConfigError("template '" + std::string(spec.slot) +
                              "': required placeholder {" + name + "} missing");
        }
    }
}

} // namespace

void PromptTemplateSet::validate() const {
    const std::string* slots[] = {&position, &critique, &defense, &evaluation, &retry_suffix};
    const auto& specs = slot_specs();
    for (std::size_t i = 0; i < specs.size(); ++i) {
        validate_slot(*slots[i], specs[i]);
    }
}

std::string PromptTemplateSet::content_hash() const {
    Fnv1a64 h;
    for (const std::string* s : {&position, &critique, &defense, &evaluation, &retry_suffix}) {
        h.update(*s);
        h.update(std::string_view("\x1f", 1));
    }
    return h.hex();
}

PromptTemplateSet PromptTemplateSet::builtin() {
    PromptTemplateSet t;
    t.position =
        "You are {role}, a member of a policy council. Your value perspective is "
        "{perspective}: {definition}\n"
        "\n"
        "The council must decide: {question}\n"
        "\n"
        "The options under consideration:\n"
        "{options}\n"
        "\n"
        "You are the champion of option {option_id} ({option_name}):\n"
        "{option_description}\n"
        "\n"
        "Present the strongest case for option {option_id}, arguing from your value "
        "perspective. Be concrete about the benefits that matter under that perspective.\n";
    t.critique =
        "You are {role}, champion of option {own_option_id} ({own_option_name}) on a policy "
        "council. Your value perspective is {perspective}: {definition}\n"
        "\n"
        "The council must decide: {question}\n"
        "\n"
        "Round 1 positions, as presented by each champion:\n"
        "{positions}\n"
        "\n"
        "From your own value perspective, critique option {target_option_id} "
        "({target_option_name}). Identify the weaknesses that matter most under your "
        "perspective.\n";
    t.defense =
        "You are {role}, champion of option {own_option_id} ({own_option_name}) on a policy "
        "council. Your value perspective is {perspective}: {definition}\n"
        "\n"
        "The council must decide: {question}\n"
        "\n"
        "Your original position:\n"
        "{own_position}\n"
        "\n"
        "The critiques raised against option {own_option_id}:\n"
        "{critiques}\n"
        "\n"
        "Defend option {own_option_id} against these critiques from your value perspective. "
        "Concede what is fair and rebut what is not.\n";
    t.evaluation =
        "You are {role}, an evaluator on a policy council. Your value perspective is "
        "{perspective}: {definition}\n"
        "\n"
        "The council must decide: {question}\n"
        "\n"
        "The options under consideration:\n"
        "{options}\n"
        "\n"
        "The champions have completed a structured debate: positions, then critiques, then "
        "defenses. The complete transcript follows.\n"
        "\n"
        "{transcript}\n"
        "\n"
        "Evaluate the debate strictly from your own value perspective and rank every option. "
        "Reply with exactly these lines and nothing else:\n"
        "{format}\n";
    t.retry_suffix =
        "Your previous reply could not be parsed. Reply again using exactly this format, one "
        "line per item, naming each option exactly once:\n"
        "{format}\n";
    return t;
}

PromptTemplateSet PromptTemplateSet::from_dir(const std::filesystem::path& dir) {
    auto read = [&](const char* file) {
        std::filesystem::path path = dir / file;
        std::ifstream in(path);
        if (!in) throw ConfigError("templates: cannot open " + path.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    PromptTemplateSet t;
    t.position = read("position.txt");
    t.critique = read("critique.txt");
    t.defense = read("defense.txt");
    t.evaluation = read("evaluation.txt");
    t.retry_suffix = read("retry_suffix.txt");
    t.validate();
    return t;
}

} // namespace council
