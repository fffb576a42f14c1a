#pragma once

#include "lungphase/audio.hpp"
#include "lungphase/image.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace lungphase {

enum class WindowKind { Hann, Hamming, Rectangular };

std::string_view to_string(WindowKind kind) noexcept;
WindowKind parse_window_kind(std::string_view name);

struct SpectrogramParams {
    int segment_len = 4096;
    int overlap = 3200;
    double max_freq_hz = 2000.0;
    WindowKind window = WindowKind::Hann;
    double db_floor = -100.0;

    int hop() const noexcept { return segment_len - overlap; }
    // Throws Error(InvalidArgument) on overlap/segment violations.
    void validate() const;
};

// Power in dB, bin-major: values[bin * n_frames + frame]. Row 0 is DC.
struct Spectrogram {
    int n_bins = 0;
    int n_frames = 0;
    std::vector<double> values;
    double bin_hz = 0.0;
    double hop_s = 0.0;
    double segment_s = 0.0;
    double duration_s = 0.0;
    int sample_rate = 0;
    std::string source_id;

    double at(int bin, int frame) const {
        return values[static_cast<std::size_t>(bin) * n_frames + frame];
    }
};

// Symmetric window of length n ("periodic=false" convention).
std::vector<double> make_window(WindowKind kind, int n);

// One-sided |X_k|^2 for k in [0, N/2] of the windowed frame (unnormalized
// DFT). Summing the mirrored full band gives N * sum((x*w)^2).
std::vector<double> power_spectrum(std::span<const double> frame, std::span<const double> window);

// Frames start every hop samples; a trailing partial frame is dropped.
// Rows keep the bins whose centre frequency is below max_freq_hz.
Spectrogram compute_spectrogram(const AudioClip& clip, const SpectrogramParams& params = {});

int expected_frame_count(std::size_t n_samples, const SpectrogramParams& params);
int expected_bin_count(int sample_rate, const SpectrogramParams& params);

// Min-max scaled to [0,255] (round half up), low frequency at the bottom,
// the grey level replicated into three channels.
Image3 to_image(const Spectrogram& spec);

// Left edge of frame f.
double frame_to_time(int frame, const Spectrogram& spec);
// min(floor(t / hop_s), n_frames - 1).
int time_to_frame(double t, const Spectrogram& spec);
// Centre of the analysis window of frame f.
double frame_center_time(int frame, const Spectrogram& spec);

// float32 little-endian matrix (bin-major) plus JSON sidecar with the axis
// metadata needed to map pixels back to seconds and Hz.
void write_spectrogram_raw(const std::filesystem::path& matrix_path, const Spectrogram& spec);
std::string spectrogram_sidecar_json(const Spectrogram& spec, const SpectrogramParams& params);

} // namespace lungphase
