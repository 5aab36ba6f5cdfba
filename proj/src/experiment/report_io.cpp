#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "council/errors.hpp"
#include "council/experiment.hpp"

namespace council {

namespace {

std::string fmt(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

std::string fmt_pct(double fraction) {
    return fmt(fraction * 100.0, 1) + "%";
}

std::string fmt_p(double p) {
    return p < 0.001 ? std::string("<.001") : fmt(p, 3);
}

std::string band_letter(const std::string& band) {
    if (band == "large") return "L";
    if (band == "medium") return "M";
    if (band == "small") return "S";
    return "N";
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

ojson to_json(const StateSummary& s) {
    ojson j;
    j["state"] = to_string(s.state);
    j["attempted"] = s.attempted;
    j["completed"] = s.completed;
    j["failed"] = s.failed;
    j["partial"] = s.partial;
    j["fcc_mean"] = s.fcc_mean;
    j["fcc_sd"] = s.fcc_sd;
    j["margin_mean"] = s.margin_mean;
    j["margin_sd"] = s.margin_sd;
    j["perspectives_mean"] = s.perspectives_mean;
    j["perspectives_sd"] = s.perspectives_sd;
    j["voice_authenticity"] = s.voice_authenticity ? ojson(*s.voice_authenticity) : ojson();
    j["mean_coherence"] = s.mean_coherence ? ojson(*s.mean_coherence) : ojson();
    ojson winners = ojson::object();
    for (const auto& [option, n] : s.winner_counts) winners[option] = n;
    j["winner_counts"] = std::move(winners);
    ojson per_run = ojson::array();
    for (const auto& rm : s.per_run) {
        per_run.push_back(ojson{{"run_id", rm.run_id}, {"metrics", to_json(rm.bundle)}});
    }
    j["per_run"] = std::move(per_run);
    return j;
}

ojson to_json(const TestRow& row) {
    ojson j;
    j["scenario"] = row.scenario;
    j["test"] = row.test;
    j["comparison"] = row.comparison;
    j["metric"] = row.metric;
    j["primary"] = row.primary;
    j["result"] = row.result ? to_json(*row.result) : ojson();
    j["note"] = row.note;
    return j;
}

ojson to_json(const ArchetypeRow& row) {
    ojson j;
    j["perspective"] = row.perspective;
    j["most_common_option"] = row.most_common_option;
    j["most_common_name"] = row.most_common_name;
    j["consistency"] = row.consistency;
    j["mean_coherence"] = row.mean_coherence ? ojson(*row.mean_coherence) : ojson();
    j["n_votes"] = row.n_votes;
    return j;
}

ojson to_json(const metrics::TensionDistribution& t) {
    ojson j;
    ojson counts = ojson::object();
    for (const auto& [category, n] : t.counts) counts[category] = n;
    j["counts"] = std::move(counts);
    j["unclassifiable"] = t.unclassifiable;
    j["total"] = t.total;
    j["trustworthy_rate"] = t.trustworthy_rate;
    j["uninstantiable"] = t.uninstantiable;
    ojson instances = ojson::array();
    for (const auto& inst : t.instances) {
        instances.push_back(ojson{{"pair", inst.pair.first + "|" + inst.pair.second},
                                  {"indirect", inst.pair.indirect},
                                  {"run_id", inst.run_id},
                                  {"role_a", inst.role_a},
                                  {"role_b", inst.role_b},
                                  {"choice_a", inst.choice_a},
                                  {"choice_b", inst.choice_b},
                                  {"coherence_a", inst.coherence_a},
                                  {"coherence_b", inst.coherence_b},
                                  {"classified", inst.classified},
                                  {"category", inst.classified ? to_string(inst.category)
                                                               : std::string("unclassifiable")}});
    }
    j["instances"] = std::move(instances);
    return j;
}

std::string ci_cell(const std::optional<BootstrapCi>& ci, const std::string& label) {
    if (!ci) return "";
    return label + ": [" + fmt(ci->lo, 3) + ", " + fmt(ci->hi, 3) + "]";
}

void markdown_summary(std::ostringstream& out, const AnalysisReport& r) {
    out << "## Summary\n\n";
    out << "| Metric | State A | State B | State C | 95% CI |\n";
    out << "|---|---|---|---|---|\n";
    out << "| N (completed/attempted) | " << r.a.completed << "/" << r.a.attempted << " | "
        << r.b.completed << "/" << r.b.attempted << " | " << r.c.completed << "/"
        << r.c.attempted << " (paired " << r.paired_n << ") | |\n";
    out << "| FCC (mean ± SD) | " << fmt(r.a.fcc_mean, 3) << " ± " << fmt(r.a.fcc_sd, 3) << " | "
        << fmt(r.b.fcc_mean, 3) << " ± " << fmt(r.b.fcc_sd, 3) << " | " << fmt(r.c.fcc_mean, 3)
        << " ± " << fmt(r.c.fcc_sd, 3) << " | " << ci_cell(r.ab_fcc_ci, "A-B") << " |\n";
    out << "| Borda margin (mean ± SD) | " << fmt(r.a.margin_mean, 3) << " ± "
        << fmt(r.a.margin_sd, 3) << " | " << fmt(r.b.margin_mean, 3) << " ± "
        << fmt(r.b.margin_sd, 3) << " | " << fmt(r.c.margin_mean, 3) << " ± "
        << fmt(r.c.margin_sd, 3) << " | " << ci_cell(r.bc_margin_ci, "B-C") << " |\n";
    out << "| Effective perspectives (mean) | " << fmt(r.a.perspectives_mean, 2) << " | "
        << fmt(r.b.perspectives_mean, 2) << " | " << fmt(r.c.perspectives_mean, 2) << " | |\n";
    out << "| Voice authenticity | — | — | "
        << (r.c.voice_authenticity ? fmt_pct(*r.c.voice_authenticity) : std::string("—"))
        << " | |\n";
    out << "| Mean coherence | — | — | "
        << (r.c.mean_coherence ? fmt(*r.c.mean_coherence, 2) : std::string("—")) << " | |\n\n";

    out << "## Winner distribution\n\n";
    out << "| Option | State A | State B | State C |\n|---|---|---|---|\n";
    std::vector<std::string> options;
    for (const auto* s : {&r.a, &r.b, &r.c}) {
        for (const auto& [option, n] : s->winner_counts) {
            if (std::find(options.begin(), options.end(), option) == options.end()) {
                options.push_back(option);
            }
        }
    }
    std::sort(options.begin(), options.end());
    auto count_of = [](const StateSummary& s, const std::string& option) {
        auto it = s.winner_counts.find(option);
        return it == s.winner_counts.end() ? std::size_t{0} : it->second;
    };
    for (const auto& option : options) {
        out << "| " << option << " | " << count_of(r.a, option) << "/" << r.a.completed << " | "
            << count_of(r.b, option) << "/" << r.b.completed << " | " << count_of(r.c, option)
            << "/" << r.c.completed << " |\n";
    }
    out << "\n";
}

void markdown_tests_header(std::ostringstream& out) {
    out << "| Scenario | Test | Comparison | Metric | p | r | Sig.? |\n";
    out << "|---|---|---|---|---|---|---|\n";
}

void markdown_test_row(std::ostringstream& out, const TestRow& row) {
    out << "| " << row.scenario << " | " << row.test << " | " << row.comparison << " | "
        << row.metric << " | ";
    if (row.result) {
        const StatResult& s = *row.result;
        bool significant = row.primary ? s.significant_primary : s.significant_bonferroni;
        out << fmt_p(s.p_value) << " | " << fmt(s.rank_biserial, 2) << " ("
            << band_letter(s.effect_band) << ") | " << (significant ? "yes" : "no")
            << (row.primary ? "" : " (Bonferroni)") << " |\n";
    } else {
        out << "— | — | skipped: " << row.note << " |\n";
    }
}

void markdown_archetypes(std::ostringstream& out, const AnalysisReport& r) {
    out << "## Archetype stability (state B)\n\n";
    out << "| Perspective | Most common | Consistency | Mean coherence |\n|---|---|---|---|\n";
    for (const auto& row : r.archetypes) {
        out << "| " << row.perspective << " | "
            << (row.most_common_name.empty() ? row.most_common_option : row.most_common_name)
            << " | " << fmt_pct(row.consistency) << " | "
            << (row.mean_coherence ? fmt(*row.mean_coherence, 2) : std::string("—")) << " |\n";
    }
    out << "\n";
}

void markdown_tension(std::ostringstream& out, const AnalysisReport& r) {
    const auto& t = r.tension;
    out << "## Tension quality (state C)\n\n";
    out << "| Category | Count | Share |\n|---|---|---|\n";
    double total = t.total == 0 ? 1.0 : static_cast<double>(t.total);
    std::size_t trustworthy = 0;
    for (const auto& name : {"authentic_disagreement", "genuine_agreement", "suspect_agreement",
                             "partial"}) {
        auto it = t.counts.find(name);
        std::size_t n = it == t.counts.end() ? 0 : it->second;
        if (std::string(name) == "authentic_disagreement" ||
            std::string(name) == "genuine_agreement") {
            trustworthy += n;
        }
        out << "| " << name << " | " << n << " | " << fmt_pct(n / total) << " |\n";
    }
    out << "| unclassifiable | " << t.unclassifiable << " | " << fmt_pct(t.unclassifiable / total)
        << " |\n";
    out << "| **trustworthy (total)** | **" << trustworthy << "** | **"
        << fmt_pct(t.trustworthy_rate) << "** |\n\n";
}

} // namespace

ojson to_json(const AnalysisReport& report) {
    ojson j;
    j["scenario"] = report.scenario_id;
    j["variant"] = report.variant;
    j["config_hash"] = report.config_hash;
    j["states"] = ojson{{"A", to_json(report.a)}, {"B", to_json(report.b)},
                        {"C", to_json(report.c)}};
    j["ab_fcc_ci"] = report.ab_fcc_ci ? to_json(*report.ab_fcc_ci) : ojson();
    j["bc_margin_ci"] = report.bc_margin_ci ? to_json(*report.bc_margin_ci) : ojson();
    ojson tests = ojson::array();
    for (const auto& row : report.tests) tests.push_back(to_json(row));
    j["tests"] = std::move(tests);
    ojson archetypes = ojson::array();
    for (const auto& row : report.archetypes) archetypes.push_back(to_json(row));
    j["archetypes"] = std::move(archetypes);
    j["tension"] = to_json(report.tension);
    j["paired_n"] = report.paired_n;
    j["excluded_pairs"] = report.excluded_pairs;
    j["gaps"] = report.gaps;
    return j;
}

std::string to_markdown(const AnalysisReport& report) {
    std::ostringstream out;
    out << "# Deliberation analysis: " << report.scenario_id << " (" << report.variant << ")\n\n";
    out << "Config hash: `" << report.config_hash << "`\n\n";
    markdown_summary(out, report);
    out << "## Statistical tests\n\n";
    markdown_tests_header(out);
    for (const auto& row : report.tests) markdown_test_row(out, row);
    out << "\n";
    markdown_archetypes(out, report);
    markdown_tension(out, report);
    if (!report.gaps.empty()) {
        out << "## Gaps\n\n";
        for (const auto& gap : report.gaps) out << "- " << gap << "\n";
        out << "\n";
    }
    return out.str();
}

void write_report_files(const std::vector<AnalysisReport>& reports,
                        const std::filesystem::path& out_dir) {
    if (reports.empty()) throw DataError("no analysis reports to write");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    auto write_file = [&](const std::string& name, const std::string& content) {
        auto path = out_dir / name;
        std::ofstream out(path);
        if (!out) throw IoError("cannot write " + path.string());
        out << content;
        if (!out) throw IoError("short write to " + path.string());
    };

    ojson all = ojson::array();
    for (const auto& report : reports) all.push_back(to_json(report));
    write_file("report.json", all.dump(2) + "\n");

    std::ostringstream md;
    for (const auto& report : reports) md << to_markdown(report);
    if (reports.size() > 1) {
        md << "# Statistical tests across scenarios\n\n";
        markdown_tests_header(md);
        for (const auto& report : reports) {
            for (const auto& row : report.tests) markdown_test_row(md, row);
        }
        md << "\n";
    }
    write_file("report.md", md.str());

    std::ostringstream summary;
    summary << "scenario,variant,state,attempted,completed,failed,partial,fcc_mean,fcc_sd,"
               "margin_mean,margin_sd,perspectives_mean,perspectives_sd,voice_authenticity,"
               "mean_coherence\n";
    for (const auto& r : reports) {
        for (const auto* s : {&r.a, &r.b, &r.c}) {
            summary << csv_escape(r.scenario_id) << "," << csv_escape(r.variant) << ","
                    << to_string(s->state) << "," << s->attempted << "," << s->completed << ","
                    << s->failed << "," << s->partial << "," << s->fcc_mean << "," << s->fcc_sd
                    << "," << s->margin_mean << "," << s->margin_sd << ","
                    << s->perspectives_mean << "," << s->perspectives_sd << ","
                    << (s->voice_authenticity ? std::to_string(*s->voice_authenticity) : "")
                    << "," << (s->mean_coherence ? std::to_string(*s->mean_coherence) : "")
                    << "\n";
        }
    }
    write_file("summary.csv", summary.str());

    std::ostringstream winners;
    winners << "scenario,variant,state,option,count\n";
    for (const auto& r : reports) {
        for (const auto* s : {&r.a, &r.b, &r.c}) {
            for (const auto& [option, n] : s->winner_counts) {
                winners << csv_escape(r.scenario_id) << "," << csv_escape(r.variant) << ","
                        << to_string(s->state) << "," << csv_escape(option) << "," << n << "\n";
            }
        }
    }
    write_file("winners.csv", winners.str());

    std::ostringstream tests;
    tests << "scenario,variant,test,comparison,metric,primary,statistic,p_value,rank_biserial,"
             "effect_band,method,alternative,n_a,n_b,zeros_dropped,significant_primary,"
             "significant_bonferroni,ci_low,ci_high,note\n";
    for (const auto& r : reports) {
        for (const auto& row : r.tests) {
            tests << csv_escape(row.scenario) << "," << csv_escape(r.variant) << "," << row.test
                  << "," << row.comparison << "," << row.metric << ","
                  << (row.primary ? "true" : "false") << ",";
            if (row.result) {
                const StatResult& s = *row.result;
                tests << s.statistic << "," << s.p_value << "," << s.rank_biserial << ","
                      << s.effect_band << "," << s.method << "," << s.alternative << "," << s.n_a
                      << "," << s.n_b << "," << s.zeros_dropped << ","
                      << (s.significant_primary ? "true" : "false") << ","
                      << (s.significant_bonferroni ? "true" : "false") << ","
                      << (s.ci ? std::to_string(s.ci->lo) : "") << ","
                      << (s.ci ? std::to_string(s.ci->hi) : "");
            } else {
                tests << ",,,,,,,,,,,,";
            }
            tests << "," << csv_escape(row.note) << "\n";
        }
    }
    write_file("tests.csv", tests.str());

    std::ostringstream archetypes;
    archetypes << "scenario,variant,perspective,most_common_option,most_common_name,consistency,"
                  "mean_coherence,n_votes\n";
    for (const auto& r : reports) {
        for (const auto& row : r.archetypes) {
            archetypes << csv_escape(r.scenario_id) << "," << csv_escape(r.variant) << ","
                       << csv_escape(row.perspective) << "," << csv_escape(row.most_common_option)
                       << "," << csv_escape(row.most_common_name) << "," << row.consistency << ","
                       << (row.mean_coherence ? std::to_string(*row.mean_coherence) : "") << ","
                       << row.n_votes << "\n";
        }
    }
    write_file("archetypes.csv", archetypes.str());

    std::ostringstream tension;
    tension << "scenario,variant,category,count,share\n";
    for (const auto& r : reports) {
        double total = r.tension.total == 0 ? 1.0 : static_cast<double>(r.tension.total);
        for (const auto& [category, n] : r.tension.counts) {
            tension << csv_escape(r.scenario_id) << "," << csv_escape(r.variant) << ","
                    << csv_escape(category) << "," << n << "," << (n / total) << "\n";
        }
        tension << csv_escape(r.scenario_id) << "," << csv_escape(r.variant)
                << ",unclassifiable," << r.tension.unclassifiable << ","
                << (r.tension.unclassifiable / total) << "\n";
        tension << csv_escape(r.scenario_id) << "," << csv_escape(r.variant)
                << ",trustworthy_total,," << r.tension.trustworthy_rate << "\n";
    }
    write_file("tension.csv", tension.str());
}

} // namespace council
