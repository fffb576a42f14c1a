#include <doctest.h>

#include "lungphase/errors.hpp"
#include "lungphase/report.hpp"
#include "lungphase/synth.hpp"

#include <json.hpp>

#include <sstream>

using namespace lungphase;

namespace {

std::vector<AgreementReport> three_comparisons() {
    std::vector<Annotation> a1, a3, algo;
    for (const auto& s : standard_corpus_specs(4, 21)) {
        auto truth = synth_file(s).second;
        a1.push_back(truth);
        auto other = truth;
        for (auto& b : other.boxes) b.start_s += 0.05;
        a3.push_back(other);
        auto hyp = truth;
        for (auto& b : hyp.boxes) b.end_s -= 0.1;
        algo.push_back(hyp);
    }
    MetricConfig cfg;
    cfg.n_bootstrap = 30;
    cfg.n_permutations = 10;
    return {evaluate_corpus(a1, algo, cfg, "Annotator 1", "Algorithm"),
            evaluate_corpus(a3, algo, cfg, "Annotator 3", "Algorithm"),
            evaluate_corpus(a1, a3, cfg, "Annotator 1", "Annotator 3")};
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

} // namespace

TEST_CASE("box agreement table has one header and one row per comparison") {
    const auto reports = three_comparisons();
    const auto t = lines(method1_table(reports));
    REQUIRE(t.size() == 4);
    CHECK(t[0].find("Agreement using boxes") == 0);
    CHECK(t[0].find("Inspiration") != std::string::npos);
    CHECK(t[0].find("Both phases") != std::string::npos);
    CHECK(t[1].find("Annotator 1 vs Algorithm") == 0);
    CHECK(t[3].find("Annotator 1 vs Annotator 3") == 0);
    for (std::size_t i = 1; i < t.size(); ++i) {
        std::size_t pct = 0;
        for (char c : t[i]) pct += c == '%';
        CHECK(pct == 3);
    }
}

TEST_CASE("screening table has two header rows, a row per comparison and an average") {
    const auto reports = three_comparisons();
    const auto t = lines(screening_table(reports));
    REQUIRE(t.size() == 6);
    CHECK(t[0].find("Sensitivity") != std::string::npos);
    CHECK(t[0].find("Specificity") != std::string::npos);
    CHECK(t[2].find("Algorithm (Annotator 1)") == 0);
    CHECK(t[5].find("Average") == 0);
    for (std::size_t i = 2; i < t.size(); ++i) {
        std::size_t pct = 0;
        for (char c : t[i]) pct += c == '%';
        CHECK(pct == 6);
    }
}

TEST_CASE("JSON report carries every category and the role convention") {
    const auto reports = three_comparisons();
    PostprocessTrace trace{1, 2, 3, 0};
    const auto j = nlohmann::json::parse(report_json(reports, &trace));
    REQUIRE(j["comparisons"].size() == 3);
    const auto& c = j["comparisons"][0];
    CHECK(c["label"] == "Annotator 1 vs Algorithm");
    CHECK(c["confusion_roles"] == "as_published");
    for (const char* key : {"inspiration", "expiration", "both"}) {
        CHECK(c["categories"].contains(key));
        CHECK(c["categories"][key]["kappa"].contains("ci_low"));
    }
    CHECK(c["files"].size() == 4);
    CHECK(j["postprocess_trace"]["n_overlaps_resolved"] == 3);
    CHECK(report_json(reports, &trace) == report_json(reports, &trace));
}

TEST_CASE("kappa CSV: three comparisons, round trip, quoting and blanks") {
    const auto rows = kappa_rows(three_comparisons());
    REQUIRE(rows.size() == 9);
    CHECK(rows[0].label == "Annotator 1 vs Algorithm: Inspiration");
    CHECK(rows[8].label == "Annotator 1 vs Annotator 3: Both phases");
    const auto csv = write_kappa_csv(rows);
    CHECK(csv.rfind("label,kappa,ci_low,ci_high\n", 0) == 0);
    CHECK(parse_kappa_csv(csv) == rows);

    const std::vector<KappaRow> odd{{"a, \"b\"", 0.5, std::nullopt, 0.75}, {"plain", std::nullopt, std::nullopt, std::nullopt}};
    const auto text = write_kappa_csv(odd);
    CHECK(text.find("\"a, \"\"b\"\"\",0.5,,0.75") != std::string::npos);
    CHECK(parse_kappa_csv(text) == odd);
    CHECK_THROWS_AS(parse_kappa_csv("wrong,header\n"), Error);
    CHECK_THROWS_AS(parse_kappa_csv("label,kappa,ci_low,ci_high\nx,abc,,\n"), Error);
}

TEST_CASE("text report names undefined values instead of printing numbers") {
    std::vector<Annotation> one{synth_file(standard_corpus_specs(1, 2)[0]).second};
    MetricConfig cfg;
    const auto r = evaluate_corpus(one, one, cfg);
    const auto text = report_text({r});
    CHECK(text.find("InsufficientFiles") != std::string::npos);
    CHECK(text.find("as published") != std::string::npos);
}
