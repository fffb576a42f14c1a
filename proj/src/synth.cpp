#include "lungphase/synth.hpp"

#include "lungphase/errors.hpp"
#include "lungphase/fft.hpp"
#include "lungphase/io_util.hpp"
#include "lungphase/parallel.hpp"
#include "lungphase/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>

namespace lungphase {

namespace {

double db_to_amplitude(double db) { return std::pow(10.0, db / 20.0); }

double draw(Rng& rng, const Jittered& j) {
    return j.jitter > 0.0 ? rng.uniform(j.mean - j.jitter, j.mean + j.jitter) : j.mean;
}

void check_jittered(const Jittered& j, const char* name) {
    if (!(j.mean > 0.0) || j.jitter < 0.0 || !(j.jitter < j.mean)) {
        throw Error(ErrorCode::InvalidArgument,
                    std::string(name) + " needs mean > 0 and 0 <= jitter < mean");
    }
}

// White Gaussian noise restricted to [low, high) Hz by zeroing FFT bins.
std::vector<double> band_noise(std::size_t n, int sample_rate, double low, double high, Rng& rng) {
    std::vector<double> x(n);
    for (auto& v : x) v = rng.normal();
    if (n < 2) {
        return x;
    }
    RealFft fft(n);
    std::vector<std::complex<double>> spectrum(fft.bins());
    fft.forward(x, spectrum);
    const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(n);
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        const double f = k * bin_hz;
        if (f < low || f >= high) spectrum[k] = 0.0;
    }
    fft.inverse(spectrum, x);
    return x;
}

} // namespace

void BreathSpec::validate() const {
    if (n_cycles < 0) {
        throw Error(ErrorCode::InvalidArgument, "n_cycles must be >= 0");
    }
    check_jittered(insp_duration_s, "insp_duration_s");
    check_jittered(exp_duration_s, "exp_duration_s");
    check_jittered(pause_s, "pause_s");
    if (lead_s < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "lead_s must be >= 0");
    }
    if (!(insp_level_db > noise_floor_db) || !(exp_level_db > noise_floor_db)) {
        throw Error(ErrorCode::InvalidArgument, "phase levels must exceed the noise floor");
    }
    if (insp_level_db > 0.0 || exp_level_db > 0.0) {
        throw Error(ErrorCode::InvalidArgument, "phase levels must be <= 0 dBFS");
    }
    if (sample_rate < kMinSampleRate) {
        throw Error(ErrorCode::InvalidArgument, "sample_rate below 8000 Hz");
    }
    if (!(band_low_hz >= 0.0) || !(band_high_hz > band_low_hz) || band_high_hz > sample_rate / 2.0) {
        throw Error(ErrorCode::InvalidArgument, "band must satisfy 0 <= low < high <= Nyquist");
    }
    if (!(duration_s > 0.0) || duration_s > kMaxSynthDuration) {
        throw Error(ErrorCode::SpecOverflow, "duration_s must be in (0, 15] s");
    }
    const double worst = lead_s +
                         n_cycles * (insp_duration_s.mean + insp_duration_s.jitter + exp_duration_s.mean +
                                     exp_duration_s.jitter) +
                         std::max(0, n_cycles - 1) * (pause_s.mean + pause_s.jitter);
    if (worst > duration_s + 1e-9) {
        throw Error(ErrorCode::SpecOverflow, std::to_string(n_cycles) + " cycles need up to " +
                                                 format_shortest(worst) + " s, file holds " +
                                                 format_shortest(duration_s) + " s");
    }
}

std::pair<AudioClip, Annotation> synth_file(const BreathSpec& spec) {
    spec.validate();

    Annotation truth;
    truth.file_id = spec.id;
    truth.source = "synthetic";
    truth.duration_s = spec.duration_s;

    Rng timing(derive_seed(spec.seed, 0));
    double t = spec.lead_s;
    for (int c = 0; c < spec.n_cycles; ++c) {
        if (c > 0) t += draw(timing, spec.pause_s);
        const double insp_end = t + draw(timing, spec.insp_duration_s);
        const double exp_end = insp_end + draw(timing, spec.exp_duration_s);
        truth.boxes.push_back({PhaseClass::Inspiration, quantize_us(t), quantize_us(insp_end), 1.0});
        truth.boxes.push_back({PhaseClass::Expiration, quantize_us(insp_end), quantize_us(exp_end), 1.0});
        t = exp_end;
    }

    AudioClip clip;
    clip.sample_rate = spec.sample_rate;
    clip.source_id = spec.id;
    const auto n = static_cast<std::size_t>(std::llround(spec.duration_s * spec.sample_rate));
    clip.samples.resize(n);

    Rng floor_rng(derive_seed(spec.seed, 1));
    const double floor_amp = db_to_amplitude(spec.noise_floor_db);
    for (auto& s : clip.samples) s = floor_amp * floor_rng.normal();

    const auto ramp_len = static_cast<std::size_t>(std::llround(kSynthRampSeconds * spec.sample_rate));
    for (std::size_t p = 0; p < truth.boxes.size(); ++p) {
        const auto& box = truth.boxes[p];
        const auto first = static_cast<std::size_t>(std::llround(box.start_s * spec.sample_rate));
        const auto last = std::min(n, static_cast<std::size_t>(std::llround(box.end_s * spec.sample_rate)));
        if (last <= first) continue;
        const std::size_t len = last - first;

        Rng burst_rng(derive_seed(spec.seed, 2 + p));
        auto burst = band_noise(len, spec.sample_rate, spec.band_low_hz, spec.band_high_hz, burst_rng);
        const std::size_t ramp = std::min(ramp_len, len / 2);
        for (std::size_t i = 0; i < ramp; ++i) {
            const double g = 0.5 * (1.0 - std::cos(std::numbers::pi * (i + 0.5) / ramp));
            burst[i] *= g;
            burst[len - 1 - i] *= g;
        }
        double energy = 0.0;
        for (double v : burst) energy += v * v;
        const double rms = std::sqrt(energy / static_cast<double>(len));
        const double level = box.phase == PhaseClass::Inspiration ? spec.insp_level_db : spec.exp_level_db;
        const double gain = rms > 0.0 ? db_to_amplitude(level) / rms : 0.0;
        for (std::size_t i = 0; i < len; ++i) {
            clip.samples[first + i] += gain * burst[i];
        }
    }
    for (auto& s : clip.samples) s = std::clamp(s, -1.0, 1.0);
    return {std::move(clip), std::move(truth)};
}

std::string write_manifest_json(const CorpusManifest& manifest) {
    std::string out = "[";
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        const auto& e = manifest[i];
        out += i == 0 ? "\n" : ",\n";
        out += "  {\"id\": " + nlohmann::json(e.id).dump() + ", \"path\": " + nlohmann::json(e.path).dump() +
               ", \"duration_s\": " + format_shortest(e.duration_s) + "}";
    }
    out += manifest.empty() ? "]\n" : "\n]\n";
    return out;
}

CorpusManifest read_manifest_json(std::string_view text) {
    CorpusManifest manifest;
    try {
        const auto j = nlohmann::json::parse(text);
        if (!j.is_array()) {
            throw Error(ErrorCode::ParseError, "manifest must be a JSON array");
        }
        for (const auto& item : j) {
            manifest.push_back({item.at("id").get<std::string>(), item.at("path").get<std::string>(),
                                item.at("duration_s").get<double>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("manifest: ") + e.what());
    }
    return manifest;
}

CorpusManifest synth_corpus(const std::vector<BreathSpec>& specs, const std::filesystem::path& out_dir,
                            unsigned jobs) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw Error(ErrorCode::IoFailure, "cannot create '" + out_dir.string() + "'");
    }
    CorpusManifest manifest(specs.size());
    parallel_for(specs.size(), jobs, [&](std::size_t i) {
        BreathSpec spec = specs[i];
        if (spec.id.empty()) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "synth_%03zu", i);
            spec.id = buf;
        }
        auto [clip, truth] = synth_file(spec);
        const auto wav_bytes = encode_wav(clip, WavEncoding::Pcm16);
        write_file_atomic(out_dir / (spec.id + ".wav"), wav_bytes);
        write_file_atomic(out_dir / (spec.id + ".json"), write_annotation_json(truth));
        manifest[i] = {spec.id, spec.id + ".wav", clip.duration_s()};
    });
    write_file_atomic(out_dir / "manifest.json", write_manifest_json(manifest));
    return manifest;
}

std::vector<BreathSpec> standard_corpus_specs(std::size_t count, std::uint64_t seed, int n_cycles,
                                              double snr_db) {
    std::vector<BreathSpec> specs;
    specs.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng(derive_seed(seed, 100, i));
        BreathSpec s;
        char buf[32];
        std::snprintf(buf, sizeof buf, "synth_%03zu", i);
        s.id = buf;
        s.n_cycles = n_cycles;
        s.insp_duration_s = {rng.uniform(1.0, 1.5), 0.1};
        s.exp_duration_s = {rng.uniform(1.2, 1.8), 0.1};
        s.pause_s = {rng.uniform(0.5, 1.2), 0.1};
        s.insp_level_db = -20.0 + rng.uniform(-3.0, 3.0);
        s.exp_level_db = s.insp_level_db - 6.0;
        s.noise_floor_db = s.exp_level_db - snr_db;
        s.seed = derive_seed(seed, 200, i);
        // Spread the remaining slack as a random lead-in.
        const double worst = n_cycles * (s.insp_duration_s.mean + 0.1 + s.exp_duration_s.mean + 0.1) +
                             std::max(0, n_cycles - 1) * (s.pause_s.mean + 0.1);
        const double slack = std::max(0.0, s.duration_s - worst);
        s.lead_s = quantize_us(rng.uniform(0.0, std::min(2.0, slack)));
        specs.push_back(s);
    }
    return specs;
}

} // namespace lungphase
