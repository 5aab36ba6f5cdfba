#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "council/deliberation.hpp"
#include "council/errors.hpp"
#include "council/providers.hpp"
#include "council/rng.hpp"
#include "fixtures.hpp"

using namespace council;
using fx::contains;
namespace fs = std::filesystem;

TEST_CASE("render_template: substitution, escapes, failures") {
    CHECK(render_template("Hello {name}!", {{"name", "world"}}) == "Hello world!");
    CHECK(render_template("{{literal}} {x}", {{"x", "v"}}) == "{literal} v");
    CHECK(render_template("no slots", {}) == "no slots");
    CHECK_THROWS_AS(render_template("{missing}", {}), ConfigError);
    CHECK_THROWS_AS(render_template("{unclosed", {}), ConfigError);
    CHECK_THROWS_AS(render_template("{}", {}), ConfigError);
    CHECK_THROWS_AS(render_template("stray } here", {}), ConfigError);

    auto names = template_placeholders("{a} {b} {a} {c}");
    CHECK(names == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("template set: builtin validates, mutations are caught") {
    PromptTemplateSet t = PromptTemplateSet::builtin();
    t.validate();

    PromptTemplateSet bad = t;
    bad.evaluation = "Rank the options. {question} {definition} {options} {format}";
    CHECK_THROWS_AS(bad.validate(), ConfigError); // transcript never reaches the evaluator

    PromptTemplateSet unknown = t;
    unknown.position += " {secret_channel}";
    CHECK_THROWS_AS(unknown.validate(), ConfigError);

    PromptTemplateSet empty = t;
    empty.retry_suffix = "";
    CHECK_THROWS_AS(empty.validate(), ConfigError);

    CHECK(t.content_hash() != bad.content_hash());
    CHECK(t.content_hash() == PromptTemplateSet::builtin().content_hash());
}

TEST_CASE("template set: directory round trip") {
    fs::path dir = fs::temp_directory_path() / "council-templates-test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    PromptTemplateSet t = PromptTemplateSet::builtin();
    const std::pair<const char*, std::string*> files[] = {{"position.txt", &t.position},
                                                          {"critique.txt", &t.critique},
                                                          {"defense.txt", &t.defense},
                                                          {"evaluation.txt", &t.evaluation},
                                                          {"retry_suffix.txt", &t.retry_suffix}};
    for (auto [name, body] : files) {
        std::ofstream out(dir / name);
        out << *body;
    }
    PromptTemplateSet loaded = PromptTemplateSet::from_dir(dir);
    CHECK(loaded.content_hash() == t.content_hash());

    fs::remove(dir / "defense.txt");
    CHECK_THROWS_AS(PromptTemplateSet::from_dir(dir), ConfigError);
}

TEST_CASE("parse_ranking: canonical block") {
    Scenario s = fx::scenario();
    ParsedRanking p =
        parse_ranking("FIRST: A\nSECOND: C\nTHIRD: B\nREASONING: safety first.", s.options);
    CHECK(p.ranking.option_ids == std::vector<std::string>{"A", "C", "B"});
    CHECK(p.reasoning == "safety first.");
}

TEST_CASE("parse_ranking: names, case, surrounding prose, multiline reasoning") {
    Scenario s = fx::scenario();
    ParsedRanking p = parse_ranking("Here is my ranking.\n"
                                    "first: light rail\n"
                                    "Second: CONGESTION PRICING\n"
                                    "THIRD: Bus Network\n"
                                    "Reasoning: rail is proven.\n"
                                    "It also anchors development.",
                                    s.options);
    CHECK(p.ranking.option_ids == std::vector<std::string>{"A", "C", "B"});
    CHECK(contains(p.reasoning, "rail is proven."));
    CHECK(contains(p.reasoning, "anchors development"));
}

TEST_CASE("parse_ranking: rejections") {
    Scenario s = fx::scenario();
    CHECK_THROWS_AS(parse_ranking("FIRST: A\nSECOND: A\nTHIRD: B\nREASONING: x", s.options),
                    ParseError); // duplicate option
    CHECK_THROWS_AS(parse_ranking("FIRST: A\nSECOND: B\nREASONING: x", s.options),
                    ParseError); // missing THIRD
    CHECK_THROWS_AS(parse_ranking("FIRST: A\nSECOND: B\nTHIRD: D\nREASONING: x", s.options),
                    ParseError); // unknown option
    CHECK_THROWS_AS(parse_ranking("FIRST: A\nSECOND: B\nTHIRD: C", s.options),
                    ParseError); // missing reasoning
    CHECK_THROWS_AS(parse_ranking("FIRST: A\nSECOND: B\nTHIRD: C\nREASONING:", s.options),
                    ParseError); // empty reasoning
    CHECK_THROWS_AS(
        parse_ranking("FIRST: A\nFIRST: B\nSECOND: B\nTHIRD: C\nREASONING: x", s.options),
        ParseError); // duplicate label
    CHECK_THROWS_AS(parse_ranking("anything", {}), ConfigError);
}

TEST_CASE("parse_ranking: parse after render is identity for all permutations") {
    Scenario s = fx::scenario();
    std::vector<std::string> ids = {"A", "B", "C"};
    std::sort(ids.begin(), ids.end());
    int permutations = 0;
    do {
        Ranking r{ids};
        ParsedRanking p = parse_ranking(render_ranking(r, "because reasons"), s.options);
        CHECK(p.ranking.option_ids == ids);
        CHECK(p.reasoning == "because reasons");
        ++permutations;
    } while (std::next_permutation(ids.begin(), ids.end()));
    CHECK(permutations == 6);
}

TEST_CASE("seed policies") {
    ModelBinding b{"m", "ep", 0.7, "derived"};
    CHECK(resolve_seed(b, 99, 4) == derive_seed(99, 4));
    b.seed_policy = "fixed:42";
    CHECK(resolve_seed(b, 99, 4) == 42);
    b.seed_policy = "none";
    CHECK_FALSE(resolve_seed(b, 99, 4).has_value());
    b.seed_policy = "fixed:abc";
    CHECK_THROWS_AS(resolve_seed(b, 99, 4), ConfigError);
    b.seed_policy = "roulette";
    CHECK_THROWS_AS(resolve_seed(b, 99, 4), ConfigError);
}

TEST_CASE("debate: structure, ordering, and keyed content") {
    Scenario s = fx::scenario();
    auto champions = fx::champions();
    ProviderHub hub;
    hub.add("scripted", fx::debate_script(s, champions));
    fx::CapturingObserver obs;
    hub.set_observer(&obs);

    Deliberator d(fx::perspectives(), PromptTemplateSet::builtin(), hub);
    DebateOutcome out = d.run_debate(s, champions, fx::assignment(champions), 7, 0);

    REQUIRE_FALSE(out.failure.has_value());
    REQUIRE(out.transcript.entries.size() == 12);
    CHECK(expected_transcript_entries(3) == 12);

    // strict round ordering: 1,1,1,2,2,2,2,2,2,3,3,3
    for (std::size_t i = 0; i < 12; ++i) {
        int expected_round = i < 3 ? 1 : i < 9 ? 2 : 3;
        CHECK(out.transcript.entries[i].round == expected_round);
    }
    CHECK(out.transcript.entries[0].text == "POS-Conservative");
    CHECK(out.transcript.entries[1].text == "POS-Innovator");
    CHECK(out.transcript.entries[2].text == "POS-Pragmatist");
    CHECK(out.transcript.entries[3].text == "CRIT-Conservative-B");
    CHECK(out.transcript.entries[3].target_option == "B");
    CHECK(out.transcript.entries[8].text == "CRIT-Pragmatist-B");
    CHECK(out.transcript.entries[9].text == "DEF-Conservative");
    CHECK(out.transcript.entries[9].target_option == "A");

    // champion order follows scenario option order even when input is shuffled
    std::vector<AgentRole> shuffled = {champions[2], champions[0], champions[1]};
    hub.add("scripted", fx::debate_script(s, champions)); // fresh sequences
    DebateOutcome again = d.run_debate(s, shuffled, fx::assignment(champions), 7, 0);
    REQUIRE_FALSE(again.failure.has_value());
    CHECK(again.transcript.entries[0].text == "POS-Conservative");
}

TEST_CASE("debate: round-r requests carry material from rounds < r only") {
    Scenario s = fx::scenario();
    auto champions = fx::champions();
    ProviderHub hub;
    hub.add("scripted", fx::debate_script(s, champions));
    fx::CapturingObserver obs;
    hub.set_observer(&obs);

    Deliberator d(fx::perspectives(), PromptTemplateSet::builtin(), hub);
    DebateOutcome out = d.run_debate(s, champions, fx::assignment(champions), 7, 0);
    REQUIRE_FALSE(out.failure.has_value());

    for (const auto& e : obs.of_phase("position")) {
        CHECK_FALSE(contains(e.request.user, "POS-"));
        CHECK_FALSE(contains(e.request.user, "CRIT-"));
        CHECK_FALSE(contains(e.request.user, "DEF-"));
    }

    // every critique request carries all three round-1 positions, no peer critiques
    auto critiques = obs.of_phase("critique");
    CHECK(critiques.size() == 6);
    for (const auto& e : critiques) {
        CHECK(contains(e.request.user, "POS-Conservative"));
        CHECK(contains(e.request.user, "POS-Innovator"));
        CHECK(contains(e.request.user, "POS-Pragmatist"));
        CHECK_FALSE(contains(e.request.user, "CRIT-"));
        CHECK_FALSE(contains(e.request.user, "DEF-"));
    }

    // defense of A sees its own position and exactly the critiques of A
    for (const auto& e : obs.of_phase("defense")) {
        if (e.site.role != "Conservative") continue;
        CHECK(contains(e.request.user, "POS-Conservative"));
        CHECK(contains(e.request.user, "CRIT-Innovator-A"));
        CHECK(contains(e.request.user, "CRIT-Pragmatist-A"));
        CHECK_FALSE(contains(e.request.user, "CRIT-Conservative-B"));
        CHECK_FALSE(contains(e.request.user, "CRIT-Innovator-C"));
        CHECK_FALSE(contains(e.request.user, "DEF-"));
    }

    // critiques are written from the champion's own perspective
    for (const auto& e : critiques) {
        if (e.site.role == "Innovator") {
            CHECK(contains(e.request.user, "Accepts uncertainty in pursuit of upside."));
        }
    }

    // derived seeds walk the debate lane in schedule order
    REQUIRE(obs.entries[0].request.seed.has_value());
    CHECK(*obs.entries[0].request.seed == derive_seed(derive_seed(7, 0), 0));
    CHECK(*obs.entries[5].request.seed == derive_seed(derive_seed(7, 0), 5));
}

TEST_CASE("debate: configuration preconditions") {
    Scenario s = fx::scenario();
    auto champions = fx::champions();
    ProviderHub hub;
    hub.add("scripted", fx::debate_script(s, champions));
    Deliberator d(fx::perspectives(), PromptTemplateSet::builtin(), hub);
    ModelAssignment assignment = fx::assignment(champions);

    std::vector<AgentRole> two = {champions[0], champions[1]};
    CHECK_THROWS_AS(d.run_debate(s, two, assignment, 7, 0), ConfigError);

    std::vector<AgentRole> dup = {champions[0], champions[1], champions[1]};
    CHECK_THROWS_AS(d.run_debate(s, dup, assignment, 7, 0), ConfigError);

    std::vector<AgentRole> not_champ = champions;
    not_champ[2] = fx::evaluator("Pragmatist", "Pragmatism");
    CHECK_THROWS_AS(d.run_debate(s, not_champ, assignment, 7, 0), ConfigError);

    std::vector<AgentRole> stranger = champions;
    stranger[2].champion_option_id = "Z";
    CHECK_THROWS_AS(d.run_debate(s, stranger, assignment, 7, 0), ConfigError);

    ModelAssignment missing = assignment;
    missing.erase("Innovator");
    CHECK_THROWS_AS(d.run_debate(s, champions, missing, 7, 0), ConfigError);
}

TEST_CASE("debate: provider failure yields partial transcript with marker") {
    Scenario s = fx::scenario();
    auto champions = fx::champions();
    auto p = std::make_shared<ScriptedProvider>("scripted");
    for (const auto& champ : champions) {
        ScriptRule pos;
        pos.role = champ.name;
        pos.phase = "position";
        pos.responses = {"POS-" + champ.name};
        p->add_rule(pos);
    } // no critique rules: first round-2 call fails
    ProviderHub hub;
    hub.add("scripted", p);

    Deliberator d(fx::perspectives(), PromptTemplateSet::builtin(), hub);
    DebateOutcome out = d.run_debate(s, champions, fx::assignment(champions), 7, 0);
    REQUIRE(out.failure.has_value());
    CHECK(out.failure->stage == "debate");
    CHECK(out.transcript.entries.size() == 3); // positions survive
}

TEST_CASE("evaluation: one record per evaluator, isolated requests") {
    Scenario s = fx::scenario();
    auto champions = fx::champions();
    auto evaluators = fx::evaluators();
    auto p = fx::debate_script(s, champions);
    fx::add_evaluation_rules(*p, evaluators);
    ProviderHub hub;
    hub.add("scripted", p);
    fx::CapturingObserver obs;
    hub.set_observer(&obs);

    ModelAssignment assignment = fx::assignment(champions);
    for (const auto& [k, v] : fx::assignment(evaluators)) assignment[k] = v;

    Deliberator d(fx::perspectives(), PromptTemplateSet::builtin(), hub);
    DebateOutcome debate = d.run_debate(s, champions, assignment, 7, 0);
    REQUIRE_FALSE(debate.failure.has_value());
    EvaluationOutcome out = d.run_evaluation(s, debate.transcript, evaluators, assignment, 7, 0);

    REQUIRE_FALSE(out.failure.has_value());
    REQUIRE(out.evaluations.size() == evaluators.size());
    for (std::size_t i = 0; i < evaluators.size(); ++i) {
        const auto& rec = out.evaluations[i];
        CHECK(rec.role == evaluators[i].name);
        CHECK(rec.perspective == evaluators[i].primary_perspective);
        CHECK(rec.parse_attempts == 1);
        CHECK(rec.reasoning == "eval-reasoning-" + evaluators[i].name);
        rec.ranking.validate_against(s.options);
    }

    auto requests = obs.of_phase("evaluation");
    REQUIRE(requests.size() == evaluators.size());
    auto perspectives = fx::perspectives();
    for (const auto& e : requests) {
        // full transcript present
        for (const auto& entry : debate.transcript.entries) {
            CHECK(contains(e.request.user, entry.text));
        }
        // no other evaluator's reasoning, ever
        for (const auto& ev : evaluators) {
            CHECK_FALSE(contains(e.request.user, "eval-reasoning-" + ev.name));
        }
        // own perspective only
        const AgentRole* self = nullptr;
        for (const auto& ev : evaluators) {
            if (ev.name == e.site.role) self = &ev;
        }
        REQUIRE(self != nullptr);
        CHECK(contains(e.request.user, perspectives.at(self->primary_perspective).definition));
        for (const auto& [name, def] : perspectives) {
            if (name == self->primary_perspective) continue;
            bool champion_perspective = false;
            for (const auto& champ : champions) {
                if (champ.primary_perspective == name) champion_perspective = true;
            }
            if (!champion_perspective) CHECK_FALSE(contains(e.request.user, def.definition));
        }
    }

    // evaluation lane seeds are independent of the debate lane
    REQUIRE(requests[0].request.seed.has_value());
    CHECK(*requests[0].request.seed == derive_seed(derive_seed(7, 1), 0));
    CHECK(*requests[1].request.seed == derive_seed(derive_seed(7, 1), 3));
}

TEST_CASE("evaluation: prose first then valid structure counts two attempts") {
    Scenario s = fx::scenario();
    auto champions = fx::champions();
    auto evaluators = fx::evaluators();
    auto p = fx::debate_script(s, champions);
    for (std::size_t i = 0; i < evaluators.size(); ++i) {
        ScriptRule rule;
        rule.role = evaluators[i].name;
        rule.phase = "evaluation";
        std::string valid = render_ranking(Ranking{{"B", "A", "C"}}, "fine on retry");
        if (evaluators[i].name == "Driver") {
            rule.responses = {"I like the bus option best, it seems balanced.", valid};
        } else {
            rule.responses = {valid};
        }
        p->add_rule(rule);
    }
    ProviderHub hub;
    hub.add("scripted", p);
    fx::CapturingObserver obs;
    hub.set_observer(&obs);

    ModelAssignment assignment = fx::assignment(evaluators);
    for (const auto& [k, v] : fx::assignment(champions)) assignment[k] = v;
    Deliberator d(fx::perspectives(), PromptTemplateSet::builtin(), hub);
    DebateOutcome debate = d.run_debate(s, champions, assignment, 7, 0);
    EvaluationOutcome out = d.run_evaluation(s, debate.transcript, evaluators, assignment, 7, 0);

    REQUIRE_FALSE(out.failure.has_value());
    int retried = 0;
    for (const auto& rec : out.evaluations) {
        if (rec.role == "Driver") {
            CHECK(rec.parse_attempts == 2);
            ++retried;
        } else {
            CHECK(rec.parse_attempts == 1);
        }
    }
    CHECK(retried == 1);

    // the retry request carries the format reminder; the first does not
    std::vector<std::string> driver_requests;
    for (const auto& e : obs.of_phase("evaluation")) {
        if (e.site.role == "Driver") driver_requests.push_back(e.request.user);
    }
    REQUIRE(driver_requests.size() == 2);
    CHECK_FALSE(contains(driver_requests[0], "could not be parsed"));
    CHECK(contains(driver_requests[1], "could not be parsed"));
}

TEST_CASE("evaluation: permanently malformed output fails the run with raw text") {
    Scenario s = fx::scenario();
    auto champions = fx::champions();
    auto evaluators = fx::evaluators();
    auto p = fx::debate_script(s, champions);
    for (const auto& ev : evaluators) {
        ScriptRule rule;
        rule.role = ev.name;
        rule.phase = "evaluation";
        if (ev.name == "Minimalist") {
            rule.responses = {"FIRST: D\nSECOND: A\nTHIRD: B\nREASONING: mystery option"};
        } else {
            rule.responses = {render_ranking(Ranking{{"A", "B", "C"}}, "ok")};
        }
        p->add_rule(rule);
    }
    ProviderHub hub;
    hub.add("scripted", p);

    ModelAssignment assignment = fx::assignment(evaluators);
    for (const auto& [k, v] : fx::assignment(champions)) assignment[k] = v;
    Deliberator d(fx::perspectives(), PromptTemplateSet::builtin(), hub);
    DebateOutcome debate = d.run_debate(s, champions, assignment, 7, 0);
    EvaluationOutcome out = d.run_evaluation(s, debate.transcript, evaluators, assignment, 7, 0);

    REQUIRE(out.failure.has_value());
    CHECK(out.failure->stage == "evaluation");
    CHECK(contains(out.failure->message, "Minimalist"));
    CHECK(contains(out.failure->message, "mystery option")); // raw text preserved
    CHECK(out.evaluations.size() == 4);                      // evaluators before the failure
}

TEST_CASE("evaluation: incomplete transcript is rejected") {
    Scenario s = fx::scenario();
    auto evaluators = fx::evaluators();
    ProviderHub hub;
    hub.add("scripted", std::make_shared<ScriptedProvider>());
    Deliberator d(fx::perspectives(), PromptTemplateSet::builtin(), hub);
    DebateTranscript partial;
    partial.entries.push_back(TranscriptEntry{"Conservative", 1, DebatePhase::Position, "A", "x"});
    CHECK_THROWS_AS(
        d.run_evaluation(s, partial, evaluators, fx::assignment(evaluators), 7, 0), DataError);
}

TEST_CASE("scripted record fixture assembles a complete state-B run") {
    DeliberationRecord rec = fx::scripted_run();
    CHECK(rec.state == ExperimentState::B);
    CHECK(rec.status == RunStatus::Completed);
    CHECK(rec.transcript.entries.size() == 12);
    CHECK(rec.evaluations.size() == 7);
}
