#include <doctest.h>

#include "lungphase/annotation.hpp"
#include "lungphase/cli.hpp"
#include "lungphase/image.hpp"
#include "lungphase/io_util.hpp"
#include "lungphase/synth.hpp"
#include "oracles.hpp"

#include <json.hpp>

#include <iostream>
#include <sstream>

using namespace lungphase;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "lungphase");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    auto* old_out = std::cout.rdbuf(out.rdbuf());
    auto* old_err = std::cerr.rdbuf(err.rdbuf());
    const int code = cli::run(static_cast<int>(argv.size()), argv.data());
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    return {code, out.str(), err.str()};
}

} // namespace

TEST_CASE("evaluate an annotation against itself") {
    const auto dir = oracle::temp_dir("cli_eval");
    const auto truth = synth_file(standard_corpus_specs(1, 3)[0]).second;
    write_file_atomic(dir / "a.json", write_annotation_json(truth));
    const auto before = read_file_text(dir / "a.json");
    const auto r = run_cli({"evaluate", "--ref", (dir / "a.json").string(), "--hyp", (dir / "a.json").string(),
                            "--out", (dir / "out").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("100.0%") != std::string::npos);
    const auto j = nlohmann::json::parse(read_file_text(dir / "out" / "report.json"));
    const auto& both = j["comparisons"][0]["categories"]["both"];
    CHECK(both["sensitivity"] == 1.0);
    CHECK(both["specificity"] == 1.0);
    CHECK(both["method1"]["agreement"] == 1.0);
    // A single file cannot give a chance-corrected kappa; the reason is reported.
    CHECK(both["kappa"]["status"] == "InsufficientFiles");
    CHECK(read_file_text(dir / "a.json") == before);
}

TEST_CASE("evaluate a two-file corpus against itself gives kappa 1") {
    const auto dir = oracle::temp_dir("cli_eval2");
    for (const auto& s : standard_corpus_specs(2, 3)) {
        const auto t = synth_file(s).second;
        write_file_atomic(dir / "c" / (t.file_id + ".json"), write_annotation_json(t));
    }
    const auto r = run_cli({"evaluate", "--ref", (dir / "c").string(), "--hyp", (dir / "c").string(), "--out",
                            (dir / "out").string(), "--bootstrap", "50"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(read_file_text(dir / "out" / "report.json"));
    CHECK(j["comparisons"][0]["categories"]["both"]["kappa"]["kappa"] == 1.0);
    CHECK(std::filesystem::exists(dir / "out" / "kappa.csv"));
    CHECK(std::filesystem::exists(dir / "out" / "kappa.png"));
}

TEST_CASE("postprocess prunes a 0.4 box") {
    const auto dir = oracle::temp_dir("cli_post");
    write_file_atomic(dir / "dets.jsonl",
                      "{\"file\":\"a\",\"class\":\"inspiration\",\"start_s\":0.5,\"end_s\":1.7,\"confidence\":0.4}\n");
    const auto r = run_cli({"postprocess", "--in", (dir / "dets.jsonl").string(), "--out",
                            (dir / "out.jsonl").string(), "--trace", (dir / "trace.json").string()});
    CHECK(r.code == 0);
    CHECK(read_file_text(dir / "out.jsonl").empty());
    CHECK(r.err.find("n_pruned=1") != std::string::npos);
    CHECK(nlohmann::json::parse(read_file_text(dir / "trace.json"))["n_pruned"] == 1);
}

TEST_CASE("input errors exit 1 with a machine-readable line") {
    const auto dir = oracle::temp_dir("cli_err");
    write_file_atomic(dir / "bad.jsonl", "{\"file\":\"a\"}\n");
    const auto r = run_cli({"postprocess", "--in", (dir / "bad.jsonl").string()});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("error code=ParseError message=\"line 1", 0) == 0);

    const auto missing = run_cli({"detect", "--in", (dir / "nothing").string(), "--out", (dir / "x").string()});
    CHECK(missing.code == 1);
    CHECK(missing.err.find("error code=IoFailure") != std::string::npos);

    CHECK(run_cli({"frobnicate"}).code == 1);
    CHECK(run_cli({}).code == 1);
    CHECK(run_cli({"detect", "--in", "x", "--out", "y", "--onset-db", "2"}).code == 1);
}

TEST_CASE("help lists defaults") {
    const auto r = run_cli({"pipeline", "--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("4096") != std::string::npos);
    CHECK(r.out.find("3200") != std::string::npos);
    CHECK(r.out.find("0.5") != std::string::npos);
}

TEST_CASE("synth, spectrogram, detect, render end to end; config file values apply") {
    const auto dir = oracle::temp_dir("cli_flow");
    const auto corpus = dir / "corpus";
    REQUIRE(run_cli({"synth", "--out", corpus.string(), "--count", "2", "--seed", "5"}).code == 0);
    CHECK(std::filesystem::exists(corpus / "manifest.json"));

    REQUIRE(run_cli({"spectrogram", "--in", corpus.string(), "--out", (dir / "png").string(), "--raw"}).code == 0);
    const auto sidecar = nlohmann::json::parse(read_file_text(dir / "png" / "synth_000.spec.json"));
    CHECK(sidecar["n_frames"] == 734);
    CHECK(sidecar["n_bins"] == 186);
    const auto png = decode_png(read_file_bytes(dir / "png" / "synth_000.png"));
    CHECK(png.width() == 734);
    CHECK(png.height() == 186);

    write_file_atomic(dir / "cfg.ini", "onset-db = 9\nmin-phase = 0.3\n");
    REQUIRE(run_cli({"detect", "--config", (dir / "cfg.ini").string(), "--in", corpus.string(), "--out",
                     (dir / "dets.jsonl").string()})
                .code == 0);
    CHECK(!read_file_text(dir / "dets.jsonl").empty());
    // Values from the file are really applied: an invalid threshold pair is rejected.
    write_file_atomic(dir / "bad.ini", "onset-db = 3\noffset-db = 4\n");
    const auto bad = run_cli({"detect", "--config", (dir / "bad.ini").string(), "--in", corpus.string(), "--out",
                              (dir / "never.jsonl").string()});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("InvalidArgument") != std::string::npos);
    CHECK(!std::filesystem::exists(dir / "never.jsonl"));

    const auto wav = (corpus / "synth_000.wav").string();
    REQUIRE(run_cli({"render", "--audio", wav, "--layer", (corpus / "synth_000.json").string(), "--layer",
                     (dir / "dets.jsonl").string(), "--out", (dir / "overlay.png").string()})
                .code == 0);
    CHECK(decode_png(read_file_bytes(dir / "overlay.png")).width() == 734);
}
