#pragma once

#include "lungphase/phase.hpp"
#include "lungphase/spectrogram.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace lungphase {

// Spectrogram in, scored phase boxes out.
class Detector {
public:
    virtual ~Detector() = default;
    virtual std::vector<PhaseBox> detect(const Spectrogram& spec) const = 0;
};

struct BaselineParams {
    double band_low_hz = 100.0;
    double band_high_hz = 2000.0;
    int smooth_frames = 5;
    double onset_db = 8.0;  // above the estimated noise floor
    double offset_db = 4.0;
    double min_phase_s = 0.25;
    PhaseClass start_class = PhaseClass::Inspiration;
    // A dip at least this deep below both neighbouring peaks splits a
    // segment; adjacent phases rarely fall back to the floor between them.
    double split_db = 3.0;
    double floor_percentile = 0.10;

    void validate() const;
};

// Mean dB over the rows inside the energy band, one value per frame.
std::vector<double> band_energy_db(const Spectrogram& spec, const BaselineParams& params);
// Centred moving average; windows are shortened at the edges.
std::vector<double> moving_average(const std::vector<double>& values, int width);

// Energy-envelope segmentation: smoothed band energy, percentile noise floor,
// hysteresis, valley splitting, minimum duration, then alternating classes.
// Boxes are sorted, non-overlapping, on the microsecond grid, with confidence
// clamp((segment mean - exit threshold) / onset_db, 0, 1).
std::vector<PhaseBox> detect_baseline(const Spectrogram& spec, const BaselineParams& params = {});

class BaselineDetector final : public Detector {
public:
    explicit BaselineDetector(BaselineParams params = {}) : params_(params) { params_.validate(); }
    std::vector<PhaseBox> detect(const Spectrogram& spec) const override {
        return detect_baseline(spec, params_);
    }

private:
    BaselineParams params_;
};

using DetectionMap = std::map<std::string, std::vector<PhaseBox>>;

// JSON lines: {"file", "class", "start_s", "end_s", "confidence"} per line.
// Unknown keys (e.g. frequency extents) are ignored. Blank lines are skipped.
// Malformed lines throw ParseError, invariant violations InvalidBox; both
// messages carry the 1-based line number.
DetectionMap parse_detections(std::string_view text);
DetectionMap load_external_detections(const std::filesystem::path& path);

// Files in id order, boxes in stored order; numbers with six decimals.
std::string write_detections_jsonl(const DetectionMap& detections);

// Serves precomputed detections keyed by the spectrogram's source id.
class ExternalDetector final : public Detector {
public:
    explicit ExternalDetector(DetectionMap detections) : detections_(std::move(detections)) {}
    std::vector<PhaseBox> detect(const Spectrogram& spec) const override;

private:
    DetectionMap detections_;
};

} // namespace lungphase
