#include "lungphase/detectors.hpp"

#include "lungphase/agreement.hpp"
#include "lungphase/errors.hpp"
#include "lungphase/io_util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lungphase {

void BaselineParams::validate() const {
    if (!(band_high_hz > band_low_hz) || band_low_hz < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "energy band must satisfy 0 <= low < high");
    }
    if (smooth_frames < 1) {
        throw Error(ErrorCode::InvalidArgument, "smooth_frames must be >= 1");
    }
    if (!(onset_db > offset_db) || !(offset_db > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "thresholds must satisfy onset_db > offset_db > 0");
    }
    if (!(min_phase_s > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "min_phase_s must be positive");
    }
    if (!(split_db > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "split_db must be positive");
    }
    if (!(floor_percentile >= 0.0 && floor_percentile <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "floor_percentile must be in [0, 1]");
    }
}

std::vector<double> band_energy_db(const Spectrogram& spec, const BaselineParams& params) {
    std::vector<int> rows;
    for (int k = 0; k < spec.n_bins; ++k) {
        const double f = k * spec.bin_hz;
        if (f >= params.band_low_hz && f < params.band_high_hz) rows.push_back(k);
    }
    if (rows.empty()) {
        throw Error(ErrorCode::InvalidArgument, "energy band contains no spectrogram rows");
    }
    std::vector<double> energy(static_cast<std::size_t>(spec.n_frames), 0.0);
    for (int k : rows) {
        for (int f = 0; f < spec.n_frames; ++f) energy[f] += spec.at(k, f);
    }
    for (auto& e : energy) e /= static_cast<double>(rows.size());
    return energy;
}

std::vector<double> moving_average(const std::vector<double>& values, int width) {
    const auto n = static_cast<std::ptrdiff_t>(values.size());
    const std::ptrdiff_t half_left = (width - 1) / 2;
    const std::ptrdiff_t half_right = width / 2;
    std::vector<double> out(values.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - half_left);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + half_right);
        double sum = 0.0;
        for (std::ptrdiff_t j = lo; j <= hi; ++j) sum += values[j];
        out[i] = sum / static_cast<double>(hi - lo + 1);
    }
    return out;
}

namespace {

struct Segment {
    int first; // inclusive frame range
    int last;
    bool split_before = false; // shares its left edge with the previous segment
    bool split_after = false;
};

// Recursively splits [first, last] at the deepest valley whose depth below
// the smaller neighbouring peak reaches split_db, provided both halves keep
// at least min_frames frames.
void split_segment(const std::vector<double>& e, Segment seg, int min_frames, double split_db,
                   std::vector<Segment>& out) {
    int best = -1;
    double best_depth = 0.0;
    for (int m = seg.first + min_frames; m <= seg.last - min_frames; ++m) {
        if (!(e[m] <= e[m - 1] && e[m] <= e[m + 1])) continue;
        const double left = *std::max_element(e.begin() + seg.first, e.begin() + m + 1);
        const double right = *std::max_element(e.begin() + m, e.begin() + seg.last + 1);
        const double depth = std::min(left, right) - e[m];
        if (depth >= split_db && depth > best_depth) {
            best = m;
            best_depth = depth;
        }
    }
    if (best < 0) {
        out.push_back(seg);
        return;
    }
    Segment left{seg.first, best, seg.split_before, true};
    Segment right{best, seg.last, true, seg.split_after};
    split_segment(e, left, min_frames, split_db, out);
    split_segment(e, right, min_frames, split_db, out);
}

} // namespace

std::vector<PhaseBox> detect_baseline(const Spectrogram& spec, const BaselineParams& params) {
    params.validate();
    if (spec.n_frames <= 0) return {};
    const auto smoothed = moving_average(band_energy_db(spec, params), params.smooth_frames);

    std::vector<double> sorted = smoothed;
    std::sort(sorted.begin(), sorted.end());
    const double floor_db = percentile_sorted(sorted, params.floor_percentile);
    const double enter = floor_db + params.onset_db;
    const double exit = floor_db + params.offset_db;

    std::vector<Segment> raw;
    bool active = false;
    int start = 0;
    for (int f = 0; f < spec.n_frames; ++f) {
        if (!active && smoothed[f] >= enter) {
            active = true;
            start = f;
        } else if (active && smoothed[f] < exit) {
            raw.push_back({start, f - 1});
            active = false;
        }
    }
    if (active) raw.push_back({start, spec.n_frames - 1});

    const int min_frames = std::max(1, static_cast<int>(std::ceil(params.min_phase_s / spec.hop_s)));
    std::vector<Segment> segments;
    for (const auto& seg : raw) split_segment(smoothed, seg, min_frames, params.split_db, segments);

    // Outer edges sit half a hop beyond the outermost frame centres; split
    // points sit on the valley frame's centre.
    auto edge_time = [&](const Segment& s, bool left) {
        const int f = left ? s.first : s.last;
        const double centre = frame_center_time(f, spec);
        const bool shared = left ? s.split_before : s.split_after;
        const double t = shared ? centre : centre + (left ? -0.5 : 0.5) * spec.hop_s;
        return std::clamp(quantize_us(t), 0.0, spec.duration_s);
    };

    std::vector<PhaseBox> boxes;
    PhaseClass next = params.start_class;
    for (const auto& seg : segments) {
        const double t0 = edge_time(seg, true);
        const double t1 = edge_time(seg, false);
        if (t1 - t0 < params.min_phase_s) continue;
        double mean = 0.0;
        for (int f = seg.first; f <= seg.last; ++f) mean += smoothed[f];
        mean /= static_cast<double>(seg.last - seg.first + 1);
        const double confidence = std::clamp((mean - exit) / params.onset_db, 0.0, 1.0);
        boxes.push_back({next, t0, t1, quantize_us(confidence)});
        next = other(next);
    }
    return boxes;
}

DetectionMap parse_detections(std::string_view text) {
    DetectionMap out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        const auto line = text.substr(pos, eol == std::string_view::npos ? text.npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

        const std::string where = "line " + std::to_string(line_no);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorCode::ParseError, where + ": " + e.what());
        }
        auto require = [&](const char* key, bool want_string) -> const nlohmann::json& {
            if (!j.is_object() || !j.contains(key) || (want_string ? !j[key].is_string() : !j[key].is_number())) {
                throw Error(ErrorCode::ParseError, where + ": missing or mistyped field '" + key + "'");
            }
            return j[key];
        };
        const auto file = require("file", true).get<std::string>();
        const auto cls = require("class", true).get<std::string>();
        PhaseBox box;
        box.start_s = require("start_s", false).get<double>();
        box.end_s = require("end_s", false).get<double>();
        box.confidence = require("confidence", false).get<double>();
        auto phase = parse_phase_class(cls);
        if (!phase) {
            throw Error(ErrorCode::InvalidBox, where + ": unknown class '" + cls + "' in " + std::string(line));
        }
        box.phase = *phase;
        try {
            validate_box(box);
        } catch (const Error& e) {
            throw Error(ErrorCode::InvalidBox, where + ": " + e.what() + " in " + std::string(line));
        }
        out[file].push_back(box);
    }
    return out;
}

DetectionMap load_external_detections(const std::filesystem::path& path) {
    return parse_detections(read_file_text(path));
}

std::string write_detections_jsonl(const DetectionMap& detections) {
    std::ostringstream out;
    for (const auto& [file, boxes] : detections) {
        const std::string id = nlohmann::json(file).dump();
        for (const auto& b : boxes) {
            out << "{\"file\": " << id << ", \"class\": \"" << to_string(b.phase)
                << "\", \"start_s\": " << format_fixed(b.start_s) << ", \"end_s\": " << format_fixed(b.end_s)
                << ", \"confidence\": " << format_fixed(b.confidence) << "}\n";
        }
    }
    return out.str();
}

std::vector<PhaseBox> ExternalDetector::detect(const Spectrogram& spec) const {
    auto it = detections_.find(spec.source_id);
    if (it == detections_.end()) return {};
    for (const auto& b : it->second) validate_box(b, spec.duration_s);
    return it->second;
}

} // namespace lungphase
