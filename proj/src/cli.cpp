#include "lungphase/cli.hpp"

#include "lungphase/agreement.hpp"
#include "lungphase/annotation.hpp"
#include "lungphase/audio.hpp"
#include "lungphase/detectors.hpp"
#include "lungphase/errors.hpp"
#include "lungphase/io_util.hpp"
#include "lungphase/parallel.hpp"
#include "lungphase/postprocess.hpp"
#include "lungphase/render.hpp"
#include "lungphase/report.hpp"
#include "lungphase/spectrogram.hpp"
#include "lungphase/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <iostream>
#include <map>
#include <set>

namespace fs = std::filesystem;

namespace lungphase::cli {

namespace {

struct Common {
    std::uint64_t seed = 42;
    unsigned jobs = 1;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", "Options file: one `key = value` per line (key is a long flag name, # "
                                "starts a comment); command-line flags take precedence")
        ->type_name("FILE");
    app->add_option("--seed", c.seed, "Seed for every stochastic step");
    app->add_option("--jobs", c.jobs, "Worker threads; never changes output")
        ->envname("LUNGPHASE_JOBS")
        ->check(CLI::PositiveNumber);
}

void add_spectrogram_options(CLI::App* app, SpectrogramParams& p, int& resample_rate) {
    app->add_option("--segment", p.segment_len, "STFT segment length in samples");
    app->add_option("--overlap", p.overlap, "STFT overlap in samples");
    app->add_option("--max-freq", p.max_freq_hz, "Keep bins with centre frequency below this (Hz)");
    app->add_option_function<std::string>(
           "--window", [&p](const std::string& s) { p.window = parse_window_kind(s); },
           "Analysis window: hann, hamming, rectangular")
        ->default_str("hann");
    app->add_option("--db-floor", p.db_floor, "Lower clamp for power in dB");
    app->add_option("--resample", resample_rate, "Resample input to this rate first (0 = keep)");
}

void add_baseline_options(CLI::App* app, BaselineParams& p) {
    app->add_option("--band-low", p.band_low_hz, "Energy band lower edge (Hz)");
    app->add_option("--band-high", p.band_high_hz, "Energy band upper edge (Hz)");
    app->add_option("--smooth", p.smooth_frames, "Moving-average width in frames");
    app->add_option("--onset-db", p.onset_db, "Enter threshold above noise floor (dB)");
    app->add_option("--offset-db", p.offset_db, "Exit threshold above noise floor (dB)");
    app->add_option("--min-phase", p.min_phase_s, "Minimum phase duration (s)");
    app->add_option("--split-db", p.split_db, "Valley depth that splits adjacent phases (dB)");
    app->add_option_function<std::string>(
           "--start-class",
           [&p](const std::string& s) {
               auto c = parse_phase_class(s);
               if (!c) throw Error(ErrorCode::InvalidArgument, "unknown class '" + s + "'");
               p.start_class = *c;
           },
           "Class of the first detected segment")
        ->default_str("inspiration");
}

void add_postprocess_options(CLI::App* app, PostprocessParams& p) {
    app->add_option("--min-confidence", p.confidence_min, "Drop boxes below this confidence");
    app->add_option("--duplicate-iou", p.duplicate_iou, "Jaccard above which boxes are duplicates");
    app->add_option("--large-overlap", p.small_overlap_max_frac,
                    "Overlap fraction of the shorter box counted as large in the trace");
    app->add_flag("--duplicates-within-class", p.duplicates_within_class_only,
                  "Only suppress duplicates of the same class");
}

void add_metric_options(CLI::App* app, MetricConfig& m) {
    app->add_option("--permutations", m.n_permutations, "Random re-pairings for chance agreement");
    app->add_option("--bootstrap", m.n_bootstrap, "Bootstrap replicates for the kappa CI");
    app->add_flag("--conventional-roles", m.conventional_roles,
                  "Count hypothesis-only time as FP instead of reference-only time");
}

// *.wav files in a directory sorted by name, or the single given file.
std::vector<fs::path> list_audio(const fs::path& in) {
    if (!fs::exists(in)) throw Error(ErrorCode::IoFailure, "no such file or directory: " + in.string());
    if (!fs::is_directory(in)) return {in};
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(in)) {
        auto ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (entry.is_regular_file() && ext == ".wav") out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    if (out.empty()) throw Error(ErrorCode::IoFailure, "no .wav files in " + in.string());
    return out;
}

AudioClip load_clip(const fs::path& path, int resample_rate) {
    auto clip = load_wav(path);
    if (resample_rate > 0 && resample_rate != clip.sample_rate) clip = resample(clip, resample_rate);
    return clip;
}

struct Detected {
    std::string id;
    double duration_s = 0.0;
    std::vector<PhaseBox> boxes;
};

std::vector<Detected> detect_all(const std::vector<fs::path>& files, const SpectrogramParams& sp,
                                 const BaselineParams& bp, int resample_rate, unsigned jobs) {
    sp.validate();
    bp.validate();
    std::vector<Detected> out(files.size());
    parallel_for(files.size(), jobs, [&](std::size_t i) {
        const auto clip = load_clip(files[i], resample_rate);
        const auto spec = compute_spectrogram(clip, sp);
        out[i] = {clip.source_id, spec.duration_s, detect_baseline(spec, bp)};
    });
    std::set<std::string> seen;
    for (const auto& d : out) {
        if (!seen.insert(d.id).second) throw Error(ErrorCode::InvalidArgument, "duplicate file id '" + d.id + "'");
    }
    return out;
}

DetectionMap to_map(const std::vector<Detected>& detected) {
    DetectionMap m;
    for (const auto& d : detected) m[d.id] = d.boxes;
    return m;
}

std::pair<DetectionMap, PostprocessTrace> postprocess_all(const DetectionMap& in, const PostprocessParams& p) {
    p.validate();
    DetectionMap out;
    PostprocessTrace total;
    for (const auto& [id, boxes] : in) {
        auto [kept, trace] = postprocess(boxes, p);
        out[id] = std::move(kept);
        total += trace;
    }
    return {out, total};
}

std::string trace_line(const PostprocessTrace& t) {
    return "trace n_pruned=" + std::to_string(t.n_pruned) +
           " n_duplicates_removed=" + std::to_string(t.n_duplicates_removed) +
           " n_overlaps_resolved=" + std::to_string(t.n_overlaps_resolved) +
           " n_large_overlaps=" + std::to_string(t.n_large_overlaps);
}

bool is_jsonl(const fs::path& p) {
    return p.extension() == ".jsonl";
}

// Detections carry no durations; they take them from `durations`, and files
// without any detection become empty annotations.
std::vector<Annotation> annotations_from_detections(const DetectionMap& dets,
                                                    const std::map<std::string, double>& durations,
                                                    const std::string& source) {
    for (const auto& [id, boxes] : dets) {
        if (!durations.count(id)) {
            throw Error(ErrorCode::MissingFile, "detections for unknown file '" + id + "'");
        }
    }
    std::vector<Annotation> out;
    for (const auto& [id, duration] : durations) {
        Annotation a{id, duration, source, {}};
        if (auto it = dets.find(id); it != dets.end()) a.boxes = it->second;
        sort_by_time(a.boxes);
        for (const auto& b : a.boxes) validate_box(b, duration);
        out.push_back(std::move(a));
    }
    return out;
}

std::map<std::string, double> durations_of(const std::vector<Annotation>& corpus) {
    std::map<std::string, double> d;
    for (const auto& a : corpus) d[a.file_id] = a.duration_s;
    return d;
}

void print_warnings(const Warnings& w) {
    for (const auto& msg : w) std::cerr << "warning: " << msg << '\n';
}

void write_reports(const fs::path& dir, const std::vector<AgreementReport>& reports,
                   const PostprocessTrace* trace) {
    write_file_atomic(dir / "report.json", report_json(reports, trace));
    write_file_atomic(dir / "report.txt", report_text(reports, trace));
    const auto rows = kappa_rows(reports);
    write_file_atomic(dir / "kappa.csv", write_kappa_csv(rows));
    write_png(dir / "kappa.png", render_kappa_chart(rows));
}

std::string trim(std::string_view s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string_view::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return std::string(s.substr(a, b - a + 1));
}

// Expands `--config FILE` into `--key=value` arguments placed right after the
// subcommand, ahead of every command-line flag; with take-last options the
// command line therefore wins.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    for (std::size_t i = 1; i < args.size(); ++i) {
        std::string file;
        std::size_t consumed = 0;
        if (args[i] == "--config" && i + 1 < args.size()) {
            file = args[i + 1];
            consumed = 2;
        } else if (args[i].rfind("--config=", 0) == 0) {
            file = args[i].substr(9);
            consumed = 1;
        } else {
            continue;
        }
        args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + consumed));
        std::vector<std::string> injected;
        const auto text = read_file_text(file);
        std::size_t line_no = 0, pos = 0;
        while (pos < text.size()) {
            const auto eol = text.find('\n', pos);
            std::string line = text.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
            pos = eol == std::string::npos ? text.size() : eol + 1;
            ++line_no;
            if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw Error(ErrorCode::ParseError,
                            file + " line " + std::to_string(line_no) + ": expected key = value");
            }
            std::string key = trim(std::string_view(line).substr(0, eq));
            std::string value = trim(std::string_view(line).substr(eq + 1));
            if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
            while (!key.empty() && key.front() == '-') key.erase(key.begin());
            injected.push_back("--" + key + "=" + value);
        }
        args.insert(args.begin() + 2, injected.begin(), injected.end());
        --i;
    }
    return args;
}

std::string escape_message(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    return out;
}

} // namespace

int run(int argc, char** argv) {
    CLI::App app{"Breathing phase detection and agreement analysis for lung sound recordings", "lungphase"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    Common common;
    SpectrogramParams sp;
    BaselineParams bp;
    PostprocessParams pp;
    MetricConfig mc;
    int resample_rate = 0;

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with ground-truth annotations");
    fs::path synth_out;
    std::size_t synth_count = 20;
    int synth_cycles = 3;
    double synth_snr = 30.0;
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--count", synth_count, "Number of files");
    synth->add_option("--cycles", synth_cycles, "Breathing cycles per file");
    synth->add_option("--snr", synth_snr, "Expiration level above the noise floor (dB)");
    add_common(synth, common);

    // spectrogram
    auto* spectro = app.add_subcommand("spectrogram", "Write spectrogram PNGs with JSON sidecars");
    fs::path spec_in, spec_out;
    bool spec_raw = false;
    spectro->add_option("--in", spec_in, "WAV file or directory")->required();
    spectro->add_option("--out", spec_out, "Output directory")->required();
    spectro->add_flag("--raw", spec_raw, "Also write the dB matrix as little-endian float32 (<id>.f32)");
    add_spectrogram_options(spectro, sp, resample_rate);
    add_common(spectro, common);

    // detect
    auto* detect = app.add_subcommand("detect", "Run the baseline detector and write detection JSON lines");
    fs::path detect_in, detect_out;
    detect->add_option("--in", detect_in, "WAV file or directory")->required();
    detect->add_option("--out", detect_out, "Detection JSON-lines output")->required();
    add_spectrogram_options(detect, sp, resample_rate);
    add_baseline_options(detect, bp);
    add_common(detect, common);

    // postprocess
    auto* post = app.add_subcommand("postprocess", "Prune, de-duplicate and resolve overlaps in detections");
    fs::path post_in, post_out, post_trace;
    post->add_option("--in", post_in, "Detection JSON lines")->required();
    post->add_option("--out", post_out, "Output JSON lines (default: standard output)");
    post->add_option("--trace", post_trace, "Write the trace as JSON to this file");
    add_postprocess_options(post, pp);
    add_common(post, common);

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "Compare two or more annotation sources");
    fs::path eval_ref, eval_hyp, eval_out;
    std::string ref_label = "Reference", hyp_label = "Algorithm";
    std::vector<std::string> eval_sources, eval_pairs;
    eval->add_option("--ref", eval_ref, "Reference annotations (file or directory)");
    eval->add_option("--hyp", eval_hyp, "Hypothesis annotations or detection JSON lines");
    eval->add_option("--ref-label", ref_label, "Display name of the reference");
    eval->add_option("--hyp-label", hyp_label, "Display name of the hypothesis");
    eval->add_option("--source", eval_sources,
                     "Named source LABEL=PATH (repeatable); the first one supplies file durations")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    eval->add_option("--pair", eval_pairs, "Comparison REF_LABEL:HYP_LABEL between named sources (repeatable)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    eval->add_option("--out", eval_out, "Directory for report.json, report.txt, kappa.csv, kappa.png");
    add_metric_options(eval, mc);
    add_common(eval, common);

    // render
    auto* render = app.add_subcommand("render", "Draw phase boxes over a spectrogram, or a kappa chart");
    fs::path render_audio, render_out, render_csv;
    std::vector<fs::path> render_layers;
    bool render_conf = false;
    render->add_option("--audio", render_audio, "WAV file to draw");
    render->add_option("--layer", render_layers,
                       "Annotation JSON/TextGrid or detection JSON lines; repeat for more layers")
        ->check(CLI::ExistingFile)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    render->add_option("--kappa-csv", render_csv, "Kappa CSV to chart instead")->check(CLI::ExistingFile);
    render->add_flag("--label-confidence", render_conf, "Print each box's confidence");
    render->add_option("--out", render_out, "Output PNG")->required();
    add_spectrogram_options(render, sp, resample_rate);
    add_common(render, common);

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "Audio to detections to post-processing to evaluation");
    fs::path pipe_in, pipe_truth, pipe_out = "pipeline_out";
    std::string truth_label = "Reference", algo_label = "Algorithm";
    pipe->add_option("--in", pipe_in, "WAV file or directory")->required();
    pipe->add_option("--truth", pipe_truth, "Reference annotations (file or directory)")->required();
    pipe->add_option("--out", pipe_out, "Output directory");
    pipe->add_option("--ref-label", truth_label, "Display name of the reference");
    pipe->add_option("--hyp-label", algo_label, "Display name of the detector");
    add_spectrogram_options(pipe, sp, resample_rate);
    add_baseline_options(pipe, bp);
    add_postprocess_options(pipe, pp);
    add_metric_options(pipe, mc);
    add_common(pipe, common);

    try {
        std::vector<std::string> args(argv, argv + argc);
        args = expand_config(std::move(args));
        std::reverse(args.begin(), args.end());
        args.pop_back(); // program name
        try {
            app.parse(args);
        } catch (const CLI::Success& e) {
            return app.exit(e);
        } catch (const CLI::ParseError& e) {
            app.exit(e);
            std::cerr << "error code=InvalidArgument message=\"" << escape_message(e.what()) << "\"\n";
            return 1;
        }
        mc.seed = common.seed;
        mc.jobs = common.jobs;

        if (*synth) {
            const auto specs = standard_corpus_specs(synth_count, common.seed, synth_cycles, synth_snr);
            const auto manifest = synth_corpus(specs, synth_out, common.jobs);
            std::cout << "wrote " << manifest.size() << " files to " << synth_out.string() << '\n';
        } else if (*spectro) {
            sp.validate();
            const auto files = list_audio(spec_in);
            parallel_for(files.size(), common.jobs, [&](std::size_t i) {
                const auto clip = load_clip(files[i], resample_rate);
                const auto spec = compute_spectrogram(clip, sp);
                const auto stem = spec_out / clip.source_id;
                write_png(fs::path(stem.string() + ".png"), to_image(spec));
                write_file_atomic(fs::path(stem.string() + ".spec.json"), spectrogram_sidecar_json(spec, sp));
                if (spec_raw) write_spectrogram_raw(fs::path(stem.string() + ".f32"), spec);
            });
            std::cout << "wrote " << files.size() << " spectrograms to " << spec_out.string() << '\n';
        } else if (*detect) {
            const auto detected = detect_all(list_audio(detect_in), sp, bp, resample_rate, common.jobs);
            write_file_atomic(detect_out, write_detections_jsonl(to_map(detected)));
        } else if (*post) {
            const auto [out, trace] = postprocess_all(load_external_detections(post_in), pp);
            const auto text = write_detections_jsonl(out);
            if (post_out.empty()) {
                std::cout << text;
            } else {
                write_file_atomic(post_out, text);
            }
            if (!post_trace.empty()) {
                nlohmann::ordered_json j;
                j["n_pruned"] = trace.n_pruned;
                j["n_duplicates_removed"] = trace.n_duplicates_removed;
                j["n_overlaps_resolved"] = trace.n_overlaps_resolved;
                j["n_large_overlaps"] = trace.n_large_overlaps;
                write_file_atomic(post_trace, j.dump(2) + "\n");
            }
            std::cerr << trace_line(trace) << '\n';
        } else if (*eval) {
            std::vector<std::pair<std::string, fs::path>> sources;
            std::vector<std::pair<std::string, std::string>> pairs;
            if (!eval_ref.empty() || !eval_hyp.empty()) {
                if (eval_ref.empty() || eval_hyp.empty()) {
                    throw Error(ErrorCode::InvalidArgument, "--ref and --hyp must be given together");
                }
                sources.emplace_back(ref_label, eval_ref);
                sources.emplace_back(hyp_label, eval_hyp);
                pairs.emplace_back(ref_label, hyp_label);
            }
            for (const auto& s : eval_sources) {
                const auto eq = s.find('=');
                if (eq == std::string::npos || eq == 0) {
                    throw Error(ErrorCode::InvalidArgument, "--source expects LABEL=PATH, got '" + s + "'");
                }
                sources.emplace_back(s.substr(0, eq), s.substr(eq + 1));
            }
            for (const auto& p : eval_pairs) {
                const auto colon = p.find(':');
                if (colon == std::string::npos) {
                    throw Error(ErrorCode::InvalidArgument, "--pair expects REF:HYP, got '" + p + "'");
                }
                pairs.emplace_back(p.substr(0, colon), p.substr(colon + 1));
            }
            if (pairs.empty()) throw Error(ErrorCode::InvalidArgument, "nothing to compare: give --ref/--hyp or --pair");

            std::map<std::string, std::vector<Annotation>> loaded;
            std::map<std::string, double> durations;
            Warnings warnings;
            for (const auto& [label, path] : sources) {
                if (loaded.count(label)) throw Error(ErrorCode::InvalidArgument, "duplicate source label '" + label + "'");
                if (is_jsonl(path)) continue;
                loaded[label] = load_annotation_corpus(path, {}, &warnings);
                if (durations.empty()) durations = durations_of(loaded[label]);
            }
            for (const auto& [label, path] : sources) {
                if (!is_jsonl(path)) continue;
                if (durations.empty()) {
                    throw Error(ErrorCode::InvalidArgument,
                                "detection JSON lines need an annotation source to supply durations");
                }
                loaded[label] = annotations_from_detections(load_external_detections(path), durations, label);
            }
            print_warnings(warnings);

            std::vector<AgreementReport> reports;
            for (const auto& [a, b] : pairs) {
                if (!loaded.count(a) || !loaded.count(b)) {
                    throw Error(ErrorCode::InvalidArgument, "unknown source in pair '" + a + ":" + b + "'");
                }
                reports.push_back(evaluate_corpus(loaded[a], loaded[b], mc, a, b));
            }
            if (!eval_out.empty()) write_reports(eval_out, reports, nullptr);
            std::cout << report_text(reports);
        } else if (*render) {
            if (!render_csv.empty()) {
                write_png(render_out, render_kappa_chart(parse_kappa_csv(read_file_text(render_csv))));
            } else {
                if (render_audio.empty()) throw Error(ErrorCode::InvalidArgument, "render needs --audio or --kappa-csv");
                const auto clip = load_clip(render_audio, resample_rate);
                const auto spec = compute_spectrogram(clip, sp);
                const OverlayStyle primary;
                // Later layers get a second palette so they stay distinguishable.
                const OverlayStyle secondary{Rgb{40, 200, 220}, Rgb{60, 200, 60}, 1, false};
                std::vector<std::pair<Annotation, OverlayStyle>> layers;
                for (std::size_t i = 0; i < render_layers.size(); ++i) {
                    Annotation a;
                    if (is_jsonl(render_layers[i])) {
                        // Multi-file detection streams contribute only this clip's boxes.
                        auto all = load_external_detections(render_layers[i]);
                        DetectionMap mine;
                        if (auto it = all.find(clip.source_id); it != all.end()) mine.insert(*it);
                        a = annotations_from_detections(mine, {{clip.source_id, spec.duration_s}}, "detections")
                                .front();
                    } else {
                        a = load_annotation_corpus(render_layers[i]).at(0);
                    }
                    OverlayStyle style = i == 0 ? primary : secondary;
                    style.label_confidence = render_conf;
                    layers.emplace_back(std::move(a), style);
                }
                const auto result = render_overlay(spec, layers);
                write_png(render_out, result.image);
                if (result.n_clamped > 0) {
                    std::cerr << "note: " << result.n_clamped << " box edge(s) pinned to the last frame\n";
                }
            }
        } else if (*pipe) {
            const auto truth = load_annotation_corpus(pipe_truth);
            const auto detected = detect_all(list_audio(pipe_in), sp, bp, resample_rate, common.jobs);
            const auto raw = to_map(detected);
            const auto [cleaned, trace] = postprocess_all(raw, pp);
            std::map<std::string, double> durations;
            for (const auto& d : detected) durations[d.id] = d.duration_s;
            const auto hyp = annotations_from_detections(cleaned, durations, algo_label);
            std::vector<AgreementReport> reports{evaluate_corpus(truth, hyp, mc, truth_label, algo_label)};
            write_file_atomic(pipe_out / "detections.jsonl", write_detections_jsonl(raw));
            write_file_atomic(pipe_out / "postprocessed.jsonl", write_detections_jsonl(cleaned));
            write_reports(pipe_out, reports, &trace);
            std::cout << report_text(reports, &trace);
        }
        return 0;
    } catch (const Error& e) {
        std::string msg = e.what();
        const std::string prefix = std::string(to_string(e.code())) + ": ";
        if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
        std::cerr << "error code=" << to_string(e.code()) << " message=\"" << escape_message(msg) << "\"\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error code=Internal message=\"" << escape_message(e.what()) << "\"\n";
        return 2;
    }
}

} // namespace lungphase::cli
