#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

// Drives the installed binary end to end against the shipped config.

namespace fs = std::filesystem;

namespace {

struct CmdResult {
    int code;
    std::string output;
};

fs::path fresh_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("council-cli-" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

CmdResult council(const std::string& args) {
    static int counter = 0;
    fs::path capture =
        fs::temp_directory_path() / ("council-cli-capture-" + std::to_string(counter++) + ".txt");
    std::string cmd = std::string(COUNCIL_BIN) + " " + args + " > " + capture.string() + " 2>&1";
    int raw = std::system(cmd.c_str());
    CmdResult r;
    r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.output = slurp(capture);
    fs::remove(capture);
    return r;
}

std::string shipped_config() { return std::string(COUNCIL_CONFIG); }

std::size_t json_files_in(const fs::path& dir) {
    if (!fs::exists(dir)) return 0;
    std::size_t n = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".json") ++n;
    }
    return n;
}

} // namespace

TEST_CASE("help exits 0 and lists every subcommand") {
    CmdResult r = council("--help");
    CHECK(r.code == 0);
    for (const char* sub : {"run", "validate", "analyze", "profile", "retest", "crossjudge"}) {
        CAPTURE(sub);
        CHECK(contains(r.output, sub));
    }
}

TEST_CASE("unknown flag exits 2") {
    CHECK(council("--definitely-not-a-flag").code == 2);
    CHECK(council("run --config x.json --state A --bogus").code == 2);
}

TEST_CASE("missing config exits 2") {
    CmdResult r = council("run --config /nonexistent/council.json --state A");
    CHECK(r.code == 2);
    CHECK(contains(r.output, "does not exist"));
}

TEST_CASE("run rejects state C") {
    CmdResult r = council("run --config " + shipped_config() + " --state C");
    CHECK(r.code == 2);
    CHECK(contains(r.output, "derived"));
}

TEST_CASE("run rejects unknown scenario") {
    fs::path runs = fresh_dir("badscenario");
    CmdResult r = council("run --config " + shipped_config() +
                          " --state A --scenario mars_colony --runs-dir " + runs.string());
    CHECK(r.code == 2);
    CHECK(contains(r.output, "mars_colony"));
}

TEST_CASE("full pipeline against the shipped config") {
    fs::path runs = fresh_dir("pipeline-runs");
    fs::path reports = fresh_dir("pipeline-reports");
    const std::string base = " --config " + shipped_config() +
                             " --scenario child_welfare --variant baseline --runs-dir " +
                             runs.string();

    CmdResult a = council("run" + base + " --state A --runs 3");
    CHECK(a.code == 0);
    CHECK(contains(a.output, "completed 3"));
    CHECK(json_files_in(runs / "child_welfare" / "baseline" / "A") == 3);

    SUBCASE("re-invocation skips persisted runs") {
        CmdResult again = council("run" + base + " --state A --runs 3");
        CHECK(again.code == 0);
        CHECK(contains(again.output, "skipped 3"));
        CHECK(json_files_in(runs / "child_welfare" / "baseline" / "A") == 3);
    }

    SUBCASE("validate needs state B first") {
        CHECK(council("validate" + base).code == 4);
    }

    SUBCASE("rest of the pipeline") {
        CmdResult b = council("run" + base + " --state B --runs 3");
        CHECK(b.code == 0);
        CHECK(json_files_in(runs / "child_welfare" / "baseline" / "B") == 3);

        CmdResult v = council("validate" + base);
        CHECK(v.code == 0);
        CHECK(contains(v.output, "state C"));
        CHECK(json_files_in(runs / "child_welfare" / "baseline" / "C") == 3);

        CmdResult v2 = council("validate" + base);
        CHECK(v2.code == 0);
        CHECK(contains(v2.output, "skipped 3"));

        CmdResult an = council("analyze" + base + " --out " + reports.string());
        CHECK(an.code == 0);
        for (const char* name :
             {"report.json", "report.md", "summary.csv", "tests.csv", "winners.csv"}) {
            CAPTURE(name);
            CHECK(fs::exists(reports / name));
        }
        std::string first = slurp(reports / "report.json");
        CmdResult an2 = council("analyze" + base + " --out " + reports.string());
        CHECK(an2.code == 0);
        CHECK(slurp(reports / "report.json") == first);

        CmdResult rt = council("retest" + base + " --out " + reports.string() + " --sample 2");
        CHECK(rt.code == 0);
        CHECK(fs::exists(reports / "retest.json"));
        CHECK(contains(slurp(reports / "retest.md"), "ICC"));

        CmdResult cj = council("crossjudge" + base + " --out " + reports.string() +
                               " --judge-a keyword-judge@judge --judge-b alt-judge@judge");
        CHECK(cj.code == 0);
        CHECK(fs::exists(reports / "crossjudge.json"));

        CmdResult same = council("crossjudge" + base +
                                 " --judge-a keyword-judge@judge --judge-b keyword-judge@judge");
        CHECK(same.code == 2);
        CHECK(contains(same.output, "distinct"));
    }
}

TEST_CASE("profile writes the alignment matrix") {
    fs::path reports = fresh_dir("profile-reports");
    CmdResult r =
        council("profile --config " + shipped_config() + " --out " + reports.string());
    CHECK(r.code == 0);
    CHECK(contains(r.output, "Suggested assignment"));
    std::string matrix = slurp(reports / "alignment.json");
    for (const char* model : {"qwen3-8b", "mistral-nemo", "gemma2-9b", "dolphin3-8b"}) {
        CAPTURE(model);
        CHECK(contains(matrix, model));
    }
}

TEST_CASE("config overrides reach the engine") {
    fs::path runs = fresh_dir("override-runs");
    CmdResult r = council("run --config " + shipped_config() +
                          " --state A --scenario housing --runs 2 --set runs_a=2 --runs-dir " +
                          runs.string());
    CHECK(r.code == 0);
    CmdResult bad = council("run --config " + shipped_config() +
                            " --state A --set no_such_key=1 --runs-dir " + runs.string());
    CHECK(bad.code == 2);
    CHECK(contains(bad.output, "no_such_key"));
}
