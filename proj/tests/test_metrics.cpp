#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "council/errors.hpp"
#include "council/metrics.hpp"
#include "council/tension.hpp"
#include "council/types.hpp"

using namespace council;
using namespace council::metrics;

namespace {

Scenario abc_scenario() {
    Scenario s;
    s.id = "demo";
    s.question = "Pick one.";
    s.options = {{"A", "Alpha", "First."}, {"B", "Beta", "Second."}, {"C", "Gamma", "Third."}};
    return s;
}

EvaluationRecord eval(const std::string& role, const std::string& perspective,
                      std::vector<std::string> order) {
    EvaluationRecord e;
    e.role = role;
    e.perspective = perspective;
    e.ranking = Ranking{std::move(order)};
    e.reasoning = "fixture";
    e.raw_response = "fixture";
    return e;
}

AgentRole evaluator(const std::string& name, const std::string& primary,
                    std::optional<std::string> secondary = std::nullopt) {
    AgentRole r;
    r.name = name;
    r.primary_perspective = primary;
    r.secondary_perspective = std::move(secondary);
    r.kind = RoleKind::Evaluator;
    return r;
}

std::vector<AgentRole> council_roles() {
    return {
        evaluator("Conservative", "Security Focus"),
        evaluator("Innovator", "Risk Tolerance", "Creativity"),
        evaluator("Pragmatist", "Pragmatism"),
        evaluator("Perfectionist", "Security Focus", "Performance Focus"),
        evaluator("Minimalist", "Simplicity Preference"),
        evaluator("Driver", "Performance Focus"),
        evaluator("Guardian", "Security Focus"),
    };
}

} // namespace

TEST_CASE("fcc: seven voters over three options take exactly five values") {
    std::set<double> seen;
    for (int a = 0; a <= 7; ++a) {
        for (int b = 0; b + a <= 7; ++b) {
            int c = 7 - a - b;
            std::map<std::string, double> t = {{"A", double(a)}, {"B", double(b)}, {"C", double(c)}};
            double fcc = first_choice_concentration(t, 7.0, 3);
            seen.insert(fcc);
            int m = std::max({a, b, c});
            CHECK(fcc == doctest::Approx((3.0 * m - 7.0) / 14.0).epsilon(1e-12));
        }
    }
    std::vector<double> expected = {1.0 / 7.0, 5.0 / 14.0, 4.0 / 7.0, 11.0 / 14.0, 1.0};
    REQUIRE(seen.size() == 5);
    std::size_t i = 0;
    for (double v : seen) CHECK(v == doctest::Approx(expected[i++]).epsilon(1e-12));
}

TEST_CASE("fcc: golden table rows") {
    std::map<std::string, double> t322 = {{"A", 3}, {"B", 2}, {"C", 2}};
    CHECK(first_choice_concentration(t322, 7, 3) == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
    std::map<std::string, double> t700 = {{"A", 7}, {"B", 0}, {"C", 0}};
    CHECK(first_choice_concentration(t700, 7, 3) == doctest::Approx(1.0));

    // The floored expected share is a known erratum: it gives 0.2 for 3-2-2
    // and never reproduces the published table.
    double floored = (3.0 - std::floor(7.0 / 3.0)) / (7.0 - std::floor(7.0 / 3.0));
    CHECK(floored == doctest::Approx(0.2));
    CHECK(first_choice_concentration(t322, 7, 3) != doctest::Approx(floored));
}

TEST_CASE("fcc: unanimity saturates at 1 for any shape") {
    for (std::size_t k = 2; k <= 6; ++k) {
        for (double n : {1.0, 4.0, 9.0, 35.0}) {
            std::map<std::string, double> t;
            for (std::size_t i = 0; i < k; ++i) t["o" + std::to_string(i)] = 0.0;
            t["o0"] = n;
            CHECK(first_choice_concentration(t, n, k) == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("fcc: weighted tallies use the weighted total") {
    std::map<std::string, double> t = {{"A", 2.0}, {"B", 1.0}, {"C", 0.5}};
    CHECK(first_choice_concentration(t, 3.5, 3) ==
          doctest::Approx(0.35714285714285715).epsilon(1e-12));
    std::map<std::string, double> zero = {{"A", 0.0}, {"B", 0.0}};
    CHECK_THROWS_AS(first_choice_concentration(zero, 0.0, 2), DegenerateStatError);
}

TEST_CASE("borda scores: identical rankings, unweighted and scaled") {
    Scenario s = abc_scenario();
    std::vector<EvaluationRecord> evals;
    for (int i = 0; i < 7; ++i) {
        evals.push_back(eval("r" + std::to_string(i), "p", {"A", "B", "C"}));
    }
    auto scores = borda_scores(evals, s.options, {2, 1, 0});
    CHECK(scores["A"] == doctest::Approx(14));
    CHECK(scores["B"] == doctest::Approx(7));
    CHECK(scores["C"] == doctest::Approx(0));

    std::vector<double> half(7, 0.5);
    auto halved = borda_scores(evals, s.options, {2, 1, 0}, half);
    CHECK(halved["A"] == doctest::Approx(7));
    CHECK(halved["B"] == doctest::Approx(3.5));
    CHECK(halved["C"] == doctest::Approx(0));

    std::vector<double> wrong(6, 1.0);
    CHECK_THROWS_AS(borda_scores(evals, s.options, {2, 1, 0}, wrong), DataError);
}

TEST_CASE("borda scores: coherence weighting can flip the winner") {
    Scenario s = abc_scenario();
    std::vector<EvaluationRecord> evals;
    for (int i = 0; i < 5; ++i) evals.push_back(eval("m" + std::to_string(i), "p", {"A", "B", "C"}));
    evals.push_back(eval("x", "p", {"B", "C", "A"}));
    evals.push_back(eval("y", "p", {"C", "B", "A"}));

    auto unweighted = borda_scores(evals, s.options, {2, 1, 0});
    CHECK(unweighted["A"] == doctest::Approx(10));
    CHECK(unweighted["B"] == doctest::Approx(8));
    CHECK(unweighted["C"] == doctest::Approx(3));
    CHECK(winner_of(unweighted) == "A");

    std::vector<double> w = {0.5, 0.5, 0.5, 0.5, 0.5, 1.0, 1.0};
    auto weighted = borda_scores(evals, s.options, {2, 1, 0}, w);
    CHECK(weighted["A"] == doctest::Approx(5.0));
    CHECK(weighted["B"] == doctest::Approx(5.5));
    CHECK(weighted["C"] == doctest::Approx(3.0)); // scores sum to 3·Σw = 13.5
    CHECK(winner_of(weighted) == "B");

    double n = 4.5;
    CHECK(borda_margin(weighted, n, 2.0) ==
          doctest::Approx(0.05555555555555555).epsilon(1e-12));
}

TEST_CASE("borda margin: basic shapes") {
    std::map<std::string, double> s = {{"A", 14}, {"B", 7}, {"C", 0}};
    CHECK(borda_margin(s, 7, 2) == doctest::Approx(0.5));
    std::map<std::string, double> tie = {{"A", 8}, {"B", 8}, {"C", 5}};
    CHECK(borda_margin(tie, 7, 2) == doctest::Approx(0.0));
    CHECK(winner_of(tie) == kTieWinner);
    CHECK_THROWS_AS(borda_margin({{"A", 1.0}}, 7, 2), ConfigError);
}

TEST_CASE("borda margin: bounded by 1/2 for (2,1,0) points") {
    // All 3^7-ish vote profiles are too many; sample the extremes plus a grid
    // over split counts.
    Scenario s = abc_scenario();
    for (int n_a = 0; n_a <= 7; ++n_a) {
        for (int n_b = 0; n_a + n_b <= 7; ++n_b) {
            std::vector<EvaluationRecord> evals;
            for (int i = 0; i < n_a; ++i) evals.push_back(eval("a", "p", {"A", "B", "C"}));
            for (int i = 0; i < n_b; ++i) evals.push_back(eval("b", "p", {"B", "C", "A"}));
            for (int i = 0; i < 7 - n_a - n_b; ++i) {
                evals.push_back(eval("c", "p", {"C", "A", "B"}));
            }
            auto scores = borda_scores(evals, s.options, {2, 1, 0});
            double bm = borda_margin(scores, 7, 2);
            CHECK(bm >= 0.0);
            CHECK(bm <= 0.5 + 1e-12);
        }
    }
}

TEST_CASE("effective perspectives: entropy reference points") {
    CHECK(effective_perspectives({1.0, 0.0, 0.0}) == doctest::Approx(0.0));
    CHECK(effective_perspectives({0.5, 0.5}) == doctest::Approx(1.0));
    CHECK(effective_perspectives({1.0 / 3, 1.0 / 3, 1.0 / 3}) ==
          doctest::Approx(1.584962500721156).epsilon(1e-12));
    CHECK(effective_perspectives({0.25, 0.25, 0.25, 0.25}) == doctest::Approx(2.0));
    CHECK(effective_perspectives({3.0 / 7, 2.0 / 7, 2.0 / 7}) ==
          doctest::Approx(1.5566567074628228).epsilon(1e-12));
    CHECK_THROWS_AS(effective_perspectives({0.7, 0.7}), DataError);
    CHECK_THROWS_AS(effective_perspectives({1.2, -0.2}), DataError);
}

TEST_CASE("voice authenticity: inclusive threshold") {
    std::vector<CoherenceAssessment> a = {
        {"r1", 0.9, "j", "", ""}, {"r2", 0.5, "j", "", ""}, {"r3", 0.6, "j", "", ""}};
    CHECK(voice_authenticity(a, 0.6) == doctest::Approx(2.0 / 3.0));
    std::vector<CoherenceAssessment> perfect = {{"r1", 1.0, "j", "", ""},
                                                {"r2", 1.0, "j", "", ""}};
    CHECK(voice_authenticity(perfect, 0.6) == doctest::Approx(1.0));
    CHECK_THROWS_AS(voice_authenticity({}, 0.6), DataError);
}

TEST_CASE("compute_metrics: weighted run bundle matches the hand computation") {
    Scenario s = abc_scenario();
    DeliberationRecord rec;
    rec.run_id = "demo-baseline-C-r0";
    rec.scenario_id = "demo";
    rec.state = ExperimentState::C;
    rec.parent_run_id = "demo-baseline-B-r0";
    std::vector<std::string> majority_roles = {"Conservative", "Perfectionist", "Guardian",
                                               "Pragmatist", "Driver"};
    std::vector<CoherenceAssessment> assessments;
    for (const auto& role : majority_roles) {
        rec.evaluations.push_back(eval(role, "p", {"A", "B", "C"}));
        assessments.push_back({role, 0.5, "judge", "", ""});
    }
    rec.evaluations.push_back(eval("Innovator", "p", {"B", "C", "A"}));
    assessments.push_back({"Innovator", 1.0, "judge", "", ""});
    rec.evaluations.push_back(eval("Minimalist", "p", {"C", "B", "A"}));
    assessments.push_back({"Minimalist", 1.0, "judge", "", ""});
    rec.assessments = assessments;

    AnalysisConfig cfg;
    MetricsBundle w = compute_metrics(rec, s, cfg, WeightingMode::CoherenceWeighted);
    CHECK(w.first_choice_tallies["A"] == doctest::Approx(2.5));
    CHECK(w.first_choice_tallies["B"] == doctest::Approx(1.0));
    CHECK(w.first_choice_tallies["C"] == doctest::Approx(1.0));
    CHECK(w.fcc == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(w.borda_scores["B"] == doctest::Approx(5.5));
    CHECK(w.winner == "B");
    CHECK(w.borda_margin == doctest::Approx(0.05555555555555555).epsilon(1e-12));
    CHECK(w.effective_perspectives == doctest::Approx(1.4355205042826666).epsilon(1e-12));
    REQUIRE(w.voice_authenticity.has_value());
    CHECK(*w.voice_authenticity == doctest::Approx(2.0 / 7.0));

    MetricsBundle u = compute_metrics(rec, s, cfg, WeightingMode::Unweighted);
    CHECK(u.winner == "A");
    CHECK(u.fcc == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
    CHECK(u.borda_margin == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
    CHECK_FALSE(u.voice_authenticity.has_value());
}

TEST_CASE("compute_metrics: unweighted equals weighted under unit coherence") {
    Scenario s = abc_scenario();
    DeliberationRecord rec;
    rec.run_id = "demo-baseline-B-r1";
    std::vector<CoherenceAssessment> assessments;
    std::vector<std::vector<std::string>> orders = {
        {"A", "B", "C"}, {"B", "A", "C"}, {"A", "C", "B"}, {"C", "B", "A"},
        {"A", "B", "C"}, {"B", "C", "A"}, {"A", "B", "C"}};
    for (std::size_t i = 0; i < orders.size(); ++i) {
        std::string role = "r" + std::to_string(i);
        rec.evaluations.push_back(eval(role, "p", orders[i]));
        assessments.push_back({role, 1.0, "judge", "", ""});
    }
    rec.assessments = assessments;
    AnalysisConfig cfg;
    MetricsBundle u = compute_metrics(rec, s, cfg, WeightingMode::Unweighted);
    MetricsBundle w = compute_metrics(rec, s, cfg, WeightingMode::CoherenceWeighted);
    CHECK(u.fcc == doctest::Approx(w.fcc));
    CHECK(u.borda_margin == doctest::Approx(w.borda_margin));
    CHECK(u.effective_perspectives == doctest::Approx(w.effective_perspectives));
    CHECK(u.winner == w.winner);
    for (const auto& [id, sc] : u.borda_scores) {
        CHECK(sc == doctest::Approx(w.borda_scores.at(id)));
    }
}

TEST_CASE("metrics: scaling every weight by a positive constant changes nothing") {
    Scenario s = abc_scenario();
    std::vector<EvaluationRecord> evals;
    std::vector<std::vector<std::string>> orders = {
        {"A", "B", "C"}, {"B", "A", "C"}, {"A", "C", "B"}, {"C", "B", "A"}, {"B", "C", "A"}};
    for (std::size_t i = 0; i < orders.size(); ++i) {
        evals.push_back(eval("r" + std::to_string(i), "p", orders[i]));
    }
    std::vector<double> w = {0.5, 0.7, 0.2, 0.9, 0.4};
    for (double lambda : {0.5, 1.3, 7.0}) {
        std::vector<double> scaled;
        for (double x : w) scaled.push_back(lambda * x);
        auto s1 = borda_scores(evals, s.options, {2, 1, 0}, w);
        auto s2 = borda_scores(evals, s.options, {2, 1, 0}, scaled);
        auto t1 = first_choice_tallies(evals, s.options, w);
        auto t2 = first_choice_tallies(evals, s.options, scaled);
        double n1 = 0, n2 = 0;
        for (const auto& [id, v] : t1) n1 += v;
        for (const auto& [id, v] : t2) n2 += v;
        CHECK(first_choice_concentration(t1, n1, 3) ==
              doctest::Approx(first_choice_concentration(t2, n2, 3)).epsilon(1e-12));
        CHECK(borda_margin(s1, n1, 2) == doctest::Approx(borda_margin(s2, n2, 2)).epsilon(1e-12));
        CHECK(winner_of(s1) == winner_of(s2));
        std::vector<double> p1, p2;
        for (const auto& [id, v] : t1) p1.push_back(v / n1);
        for (const auto& [id, v] : t2) p2.push_back(v / n2);
        CHECK(effective_perspectives(p1) == doctest::Approx(effective_perspectives(p2)));
    }
}

TEST_CASE("classify_tension: the four quadrants and the inclusive boundary") {
    CHECK(classify_tension("A", 0.9, "B", 0.8, 0.6) == TensionCategory::AuthenticDisagreement);
    CHECK(classify_tension("A", 0.9, "A", 0.8, 0.6) == TensionCategory::GenuineAgreement);
    CHECK(classify_tension("A", 0.9, "A", 0.3, 0.6) == TensionCategory::SuspectAgreement);
    CHECK(classify_tension("A", 0.9, "B", 0.3, 0.6) == TensionCategory::Partial);
    CHECK(classify_tension("A", 0.6, "B", 0.6, 0.6) == TensionCategory::AuthenticDisagreement);
    CHECK(classify_tension("A", 0.6, "A", 0.59, 0.6) == TensionCategory::SuspectAgreement);
}

namespace {

DeliberationRecord tension_fixture(bool drop_driver_assessment = false) {
    DeliberationRecord rec;
    rec.run_id = "demo-baseline-C-r9";
    struct Row {
        const char* role;
        const char* choice;
        double c;
    };
    std::vector<Row> rows = {
        {"Conservative", "A", 0.9}, {"Innovator", "B", 0.7},    {"Pragmatist", "A", 0.4},
        {"Perfectionist", "A", 0.5}, {"Minimalist", "B", 0.8},  {"Driver", "B", 0.3},
        {"Guardian", "A", 0.95},
    };
    std::vector<CoherenceAssessment> assessments;
    for (const auto& row : rows) {
        std::vector<std::string> order = {row.choice, row.choice == std::string("A") ? "B" : "A",
                                          "C"};
        rec.evaluations.push_back(eval(row.role, "p", order));
        if (drop_driver_assessment && std::string(row.role) == "Driver") continue;
        assessments.push_back({row.role, row.c, "judge", "", ""});
    }
    rec.assessments = assessments;
    return rec;
}

} // namespace

TEST_CASE("tension_rate: unanimous coherent council is fully genuine") {
    DeliberationRecord rec;
    rec.run_id = "demo-baseline-C-r1";
    std::vector<CoherenceAssessment> assessments;
    for (const auto& role : council_roles()) {
        rec.evaluations.push_back(eval(role.name, role.primary_perspective, {"A", "B", "C"}));
        assessments.push_back({role.name, 1.0, "judge", "", ""});
    }
    rec.assessments = assessments;
    TensionDistribution d = tension_rate({rec}, default_tension_pairs(), council_roles(), 0.6);
    CHECK(d.total == 10); // 3+3+1+1+1+1 qualifying role pairs
    CHECK(d.counts.at("genuine_agreement") == 10);
    CHECK(d.counts.at("authentic_disagreement") == 0);
    CHECK(d.trustworthy_rate == doctest::Approx(1.0));
    CHECK(d.unclassifiable == 0);
    CHECK(d.uninstantiable.empty());
}

TEST_CASE("tension_rate: hand-enumerated mixed fixture") {
    TensionDistribution d =
        tension_rate({tension_fixture()}, default_tension_pairs(), council_roles(), 0.6);
    CHECK(d.total == 10);
    CHECK(d.counts.at("authentic_disagreement") == 4);
    CHECK(d.counts.at("partial") == 4);
    CHECK(d.counts.at("suspect_agreement") == 1);
    CHECK(d.counts.at("genuine_agreement") == 1);
    CHECK(d.trustworthy_rate == doctest::Approx(0.5));

    // category counts partition the instances
    std::size_t sum = d.unclassifiable;
    for (const auto& [name, c] : d.counts) sum += c;
    CHECK(sum == d.total);

    // indirect pairs landed on the secondary-trait bearer
    bool saw_indirect = false;
    for (const auto& inst : d.instances) {
        if (inst.pair.indirect) {
            saw_indirect = true;
            CHECK((inst.role_a == "Innovator" || inst.role_b == "Innovator"));
        }
    }
    CHECK(saw_indirect);
}

TEST_CASE("tension_rate: missing assessment lands in the unclassifiable bucket") {
    TensionDistribution d =
        tension_rate({tension_fixture(true)}, default_tension_pairs(), council_roles(), 0.6);
    CHECK(d.total == 10);
    CHECK(d.unclassifiable == 1); // the Driver-Minimalist pair
    CHECK(d.counts.at("suspect_agreement") == 0);
    CHECK(d.trustworthy_rate == doctest::Approx(0.5));
    std::size_t sum = d.unclassifiable;
    for (const auto& [name, c] : d.counts) sum += c;
    CHECK(sum == d.total);
}

TEST_CASE("tension_rate: perspectives without bearers are reported uninstantiable") {
    TensionPairMap map;
    map.pairs = {{"Security Focus", "Frugality", false}};
    TensionDistribution d = tension_rate({tension_fixture()}, map, council_roles(), 0.6);
    CHECK(d.total == 0);
    REQUIRE(d.uninstantiable.size() == 1);
    CHECK(d.uninstantiable[0] == "Security Focus|Frugality");

    // a direct pair is not rescued by a secondary-trait bearer
    TensionPairMap direct_only;
    direct_only.pairs = {{"Security Focus", "Creativity", false}};
    TensionDistribution d2 = tension_rate({tension_fixture()}, direct_only, council_roles(), 0.6);
    CHECK(d2.total == 0);
    CHECK(d2.uninstantiable.size() == 1);
}

TEST_CASE("tension_rate: instances scale linearly over records") {
    std::vector<DeliberationRecord> recs = {tension_fixture(), tension_fixture()};
    recs[1].run_id = "demo-baseline-C-r10";
    TensionDistribution d = tension_rate(recs, default_tension_pairs(), council_roles(), 0.6);
    CHECK(d.total == 20);
    CHECK(d.counts.at("authentic_disagreement") == 8);
    CHECK(d.trustworthy_rate == doctest::Approx(0.5));
}
