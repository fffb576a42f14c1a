#include "lungphase/spectrogram.hpp"

#include "lungphase/errors.hpp"
#include "lungphase/fft.hpp"
#include "lungphase/io_util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <numbers>

namespace lungphase {

namespace {
constexpr double kPowerEpsilon = 1e-10;
}

std::string_view to_string(WindowKind kind) noexcept {
    switch (kind) {
    case WindowKind::Hann: return "hann";
    case WindowKind::Hamming: return "hamming";
    case WindowKind::Rectangular: return "rectangular";
    }
    return "hann";
}

WindowKind parse_window_kind(std::string_view text) {
    std::string name(text);
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    if (name == "hann") return WindowKind::Hann;
    if (name == "hamming") return WindowKind::Hamming;
    if (name == "rectangular" || name == "rect") return WindowKind::Rectangular;
    throw Error(ErrorCode::InvalidArgument, "unknown window '" + std::string(text) + "'");
}

void SpectrogramParams::validate() const {
    if (segment_len < 2) {
        throw Error(ErrorCode::InvalidArgument, "segment_len must be at least 2");
    }
    if (overlap < 0 || overlap >= segment_len) {
        throw Error(ErrorCode::InvalidArgument, "overlap must satisfy 0 <= overlap < segment_len");
    }
    if (!(max_freq_hz > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "max_freq_hz must be positive");
    }
    if (!std::isfinite(db_floor)) {
        throw Error(ErrorCode::InvalidArgument, "db_floor must be finite");
    }
}

std::vector<double> make_window(WindowKind kind, int n) {
    std::vector<double> w(static_cast<std::size_t>(n), 1.0);
    if (kind == WindowKind::Rectangular || n < 2) {
        return w;
    }
    const double a0 = kind == WindowKind::Hann ? 0.5 : 0.54;
    const double a1 = 1.0 - a0;
    for (int i = 0; i < n; ++i) {
        w[i] = a0 - a1 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
    }
    return w;
}

std::vector<double> power_spectrum(std::span<const double> frame, std::span<const double> window) {
    if (frame.size() != window.size()) {
        throw std::invalid_argument("frame and window lengths differ");
    }
    RealFft fft(frame.size());
    std::vector<double> windowed(frame.size());
    for (std::size_t i = 0; i < frame.size(); ++i) {
        windowed[i] = frame[i] * window[i];
    }
    std::vector<std::complex<double>> spectrum(fft.bins());
    fft.forward(windowed, spectrum);
    std::vector<double> power(spectrum.size());
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        power[k] = std::norm(spectrum[k]);
    }
    return power;
}

int expected_frame_count(std::size_t n_samples, const SpectrogramParams& params) {
    const auto seg = static_cast<std::size_t>(params.segment_len);
    if (n_samples < seg) {
        return 0;
    }
    return static_cast<int>((n_samples - seg) / static_cast<std::size_t>(params.hop())) + 1;
}

int expected_bin_count(int sample_rate, const SpectrogramParams& params) {
    const double bin_hz = static_cast<double>(sample_rate) / params.segment_len;
    const int max_bins = params.segment_len / 2 + 1;
    // Integer-first comparison so bins on exactly max_freq_hz are excluded.
    int n = static_cast<int>(std::ceil(params.max_freq_hz / bin_hz));
    while (n > 0 && (n - 1) * bin_hz >= params.max_freq_hz) --n;
    while (n < max_bins && n * bin_hz < params.max_freq_hz) ++n;
    return std::min(n, max_bins);
}

Spectrogram compute_spectrogram(const AudioClip& clip, const SpectrogramParams& params) {
    params.validate();
    if (params.max_freq_hz > clip.sample_rate / 2.0) {
        throw Error(ErrorCode::InvalidArgument, "max_freq_hz exceeds the Nyquist frequency");
    }
    if (clip.samples.size() < static_cast<std::size_t>(params.segment_len)) {
        throw Error(ErrorCode::ClipTooShort,
                    "clip has " + std::to_string(clip.samples.size()) + " samples, segment needs " +
                        std::to_string(params.segment_len));
    }

    Spectrogram spec;
    spec.n_frames = expected_frame_count(clip.samples.size(), params);
    spec.n_bins = expected_bin_count(clip.sample_rate, params);
    spec.sample_rate = clip.sample_rate;
    spec.bin_hz = static_cast<double>(clip.sample_rate) / params.segment_len;
    spec.hop_s = static_cast<double>(params.hop()) / clip.sample_rate;
    spec.segment_s = static_cast<double>(params.segment_len) / clip.sample_rate;
    spec.duration_s = clip.duration_s();
    spec.source_id = clip.source_id;
    spec.values.resize(static_cast<std::size_t>(spec.n_bins) * spec.n_frames);

    const auto window = make_window(params.window, params.segment_len);
    RealFft fft(static_cast<std::size_t>(params.segment_len));
    std::vector<double> frame(static_cast<std::size_t>(params.segment_len));
    std::vector<std::complex<double>> spectrum(fft.bins());
    for (int f = 0; f < spec.n_frames; ++f) {
        const std::size_t offset = static_cast<std::size_t>(f) * params.hop();
        for (int i = 0; i < params.segment_len; ++i) {
            frame[i] = clip.samples[offset + i] * window[i];
        }
        fft.forward(frame, spectrum);
        for (int k = 0; k < spec.n_bins; ++k) {
            const double db = 10.0 * std::log10(std::norm(spectrum[k]) + kPowerEpsilon);
            spec.values[static_cast<std::size_t>(k) * spec.n_frames + f] = std::max(db, params.db_floor);
        }
    }
    return spec;
}

Image3 to_image(const Spectrogram& spec) {
    if (spec.n_bins <= 0 || spec.n_frames <= 0 || spec.values.empty()) {
        throw Error(ErrorCode::InvalidArgument, "empty spectrogram");
    }
    const auto [lo_it, hi_it] = std::minmax_element(spec.values.begin(), spec.values.end());
    const double lo = *lo_it;
    const double range = *hi_it - lo;
    Image3 image(spec.n_frames, spec.n_bins);
    for (int bin = 0; bin < spec.n_bins; ++bin) {
        const int y = spec.n_bins - 1 - bin;
        for (int f = 0; f < spec.n_frames; ++f) {
            std::uint8_t level = 0;
            if (range > 0.0) {
                const double scaled = (spec.at(bin, f) - lo) / range * 255.0;
                level = static_cast<std::uint8_t>(std::clamp(std::floor(scaled + 0.5), 0.0, 255.0));
            }
            image.set(f, y, {level, level, level});
        }
    }
    return image;
}

double frame_to_time(int frame, const Spectrogram& spec) {
    if (frame < 0 || frame >= spec.n_frames) {
        throw Error(ErrorCode::OutOfRange, "frame " + std::to_string(frame) + " outside [0, " +
                                               std::to_string(spec.n_frames) + ")");
    }
    return frame * spec.hop_s;
}

int time_to_frame(double t, const Spectrogram& spec) {
    if (!(t >= 0.0) || t > spec.duration_s + 1e-9) {
        throw Error(ErrorCode::OutOfRange, "time " + format_shortest(t) + " s outside [0, " +
                                               format_shortest(spec.duration_s) + "]");
    }
    // Nudge by a relative epsilon so frame_to_time(f) maps back to f.
    const double exact = t / spec.hop_s;
    const auto f = static_cast<int>(std::floor(exact + 1e-9 * std::max(1.0, exact)));
    return std::min(f, spec.n_frames - 1);
}

double frame_center_time(int frame, const Spectrogram& spec) {
    return frame * spec.hop_s + spec.segment_s / 2.0;
}

void write_spectrogram_raw(const std::filesystem::path& matrix_path, const Spectrogram& spec) {
    std::vector<std::uint8_t> bytes(spec.values.size() * 4);
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
        const float v = static_cast<float>(spec.values[i]);
        std::uint32_t raw;
        std::memcpy(&raw, &v, sizeof raw);
        for (int b = 0; b < 4; ++b) {
            bytes[i * 4 + b] = static_cast<std::uint8_t>((raw >> (8 * b)) & 0xFF);
        }
    }
    write_file_atomic(matrix_path, bytes);
}

std::string spectrogram_sidecar_json(const Spectrogram& spec, const SpectrogramParams& params) {
    nlohmann::ordered_json j;
    j["source_id"] = spec.source_id;
    j["n_bins"] = spec.n_bins;
    j["n_frames"] = spec.n_frames;
    j["bin_hz"] = spec.bin_hz;
    j["hop_s"] = spec.hop_s;
    j["segment_s"] = spec.segment_s;
    j["duration_s"] = spec.duration_s;
    j["sample_rate"] = spec.sample_rate;
    j["segment_len"] = params.segment_len;
    j["overlap"] = params.overlap;
    j["max_freq_hz"] = params.max_freq_hz;
    j["window"] = std::string(to_string(params.window));
    j["layout"] = "float32le bin-major, row 0 = DC";
    return j.dump(2) + "\n";
}

} // namespace lungphase
