#pragma once

#include "lungphase/annotation.hpp"
#include "lungphase/audio.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace lungphase {

inline constexpr double kMaxSynthDuration = 15.0;
inline constexpr double kSynthRampSeconds = 0.05;

// A duration drawn uniformly from [mean - jitter, mean + jitter].
struct Jittered {
    double mean = 0.0;
    double jitter = 0.0;
};

// Recipe for one synthetic recording: cycles of inspiration then
// expiration, separated by pauses, after an optional silent lead-in.
struct BreathSpec {
    std::string id;
    int n_cycles = 3;
    Jittered insp_duration_s{1.2, 0.0};
    Jittered exp_duration_s{1.5, 0.0};
    Jittered pause_s{0.8, 0.0};
    double lead_s = 0.0;
    double insp_level_db = -20.0; // RMS re full scale
    double exp_level_db = -26.0;
    double noise_floor_db = -56.0;
    double band_low_hz = 100.0;
    double band_high_hz = 2000.0;
    double duration_s = kMaxSynthDuration;
    int sample_rate = kCanonicalSampleRate;
    std::uint64_t seed = 0;

    // Throws InvalidArgument for malformed values and SpecOverflow when the
    // longest possible jittered layout does not fit in duration_s.
    void validate() const;
};

// Band-limited Gaussian noise bursts with 50 ms raised-cosine edges over a
// white noise floor. Each burst is scaled so its RMS over the phase window
// equals the requested level. Ground truth times lie on the microsecond grid.
std::pair<AudioClip, Annotation> synth_file(const BreathSpec& spec);

struct ManifestEntry {
    std::string id;
    std::string path; // relative to the manifest's directory
    double duration_s = 0.0;
    bool operator==(const ManifestEntry&) const = default;
};

using CorpusManifest = std::vector<ManifestEntry>;

// Writes <id>.wav (16-bit PCM), <id>.json and manifest.json into out_dir.
CorpusManifest synth_corpus(const std::vector<BreathSpec>& specs, const std::filesystem::path& out_dir,
                            unsigned jobs = 1);

std::string write_manifest_json(const CorpusManifest& manifest);
CorpusManifest read_manifest_json(std::string_view text);

// Varied but reproducible specs: per-file phase means, jitter, lead-in and
// level, with the noise floor `snr_db` below the expiration level.
std::vector<BreathSpec> standard_corpus_specs(std::size_t count, std::uint64_t seed, int n_cycles = 3,
                                              double snr_db = 30.0);

} // namespace lungphase
