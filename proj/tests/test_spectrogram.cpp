#include <doctest.h>

#include "lungphase/errors.hpp"
#include "lungphase/random.hpp"
#include "lungphase/spectrogram.hpp"
#include "oracles.hpp"

#include <json.hpp>

#include <cmath>
#include <numeric>

using namespace lungphase;

namespace {

AudioClip noise_clip(std::size_t n, int rate, std::uint64_t seed) {
    AudioClip clip;
    clip.sample_rate = rate;
    clip.source_id = "noise";
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) clip.samples.push_back(rng.uniform(-0.5, 0.5));
    return clip;
}

} // namespace

TEST_CASE("default shapes for 15 s and 10 s at 44100 Hz") {
    CHECK(expected_frame_count(661500, {}) == 734);
    CHECK(expected_frame_count(441000, {}) == 488);
    CHECK(expected_bin_count(44100, {}) == 186);

    const auto spec = compute_spectrogram(noise_clip(661500, 44100, 1));
    CHECK(spec.n_frames == 734);
    CHECK(spec.n_bins == 186);
    CHECK(spec.values.size() == 734u * 186u);
    CHECK(spec.hop_s == doctest::Approx(896.0 / 44100.0));
    CHECK(spec.bin_hz == doctest::Approx(44100.0 / 4096.0));
    CHECK(185 * spec.bin_hz < 2000.0);
    CHECK(186 * spec.bin_hz >= 2000.0);
}

TEST_CASE("shape formulas hold across random lengths") {
    Rng rng(5);
    SpectrogramParams p;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 4096 + rng.below(20000);
        const auto spec = compute_spectrogram(noise_clip(n, 16000, trial), p);
        CHECK(spec.n_frames == static_cast<int>((n - 4096) / 896 + 1));
        CHECK(spec.n_frames == expected_frame_count(n, p));
        CHECK(spec.n_bins == expected_bin_count(16000, p));
    }
}

TEST_CASE("clip shorter than a segment is rejected") {
    try {
        compute_spectrogram(noise_clip(4095, 44100, 1));
        FAIL("expected ClipTooShort");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ClipTooShort);
    }
}

TEST_CASE("invalid parameters are rejected") {
    SpectrogramParams p;
    p.overlap = 4096;
    CHECK_THROWS_AS(p.validate(), Error);
    p.overlap = -1;
    CHECK_THROWS_AS(p.validate(), Error);
    SpectrogramParams q;
    q.max_freq_hz = 9000;
    CHECK_THROWS_AS(compute_spectrogram(noise_clip(5000, 16000, 1), q), Error);
}

TEST_CASE("silence maps to the dB floor") {
    AudioClip clip;
    clip.samples.assign(10000, 0.0);
    const auto spec = compute_spectrogram(clip);
    for (double v : spec.values) CHECK(v == -100.0);
}

TEST_CASE("power spectrum agrees with the direct DFT") {
    const auto window = make_window(WindowKind::Hann, 512);
    Rng rng(3);
    std::vector<double> frame(512);
    for (auto& x : frame) x = rng.uniform(-1, 1);
    const auto fast = power_spectrum(frame, window);
    const auto slow = oracle::dft_power(frame, window);
    REQUIRE(fast.size() == 257);
    const double total = std::accumulate(slow.begin(), slow.end(), 0.0);
    for (std::size_t k = 0; k < fast.size(); ++k) CHECK(std::abs(fast[k] - slow[k]) <= 1e-9 * total);
}

TEST_CASE("Parseval: mirrored one-sided power equals N times windowed energy") {
    const int n = 4096;
    const auto window = make_window(WindowKind::Hann, n);
    Rng rng(11);
    std::vector<double> frame(n);
    for (auto& x : frame) x = rng.normal();
    const auto half = power_spectrum(frame, window);
    double full = half[0] + half[n / 2];
    for (int k = 1; k < n / 2; ++k) full += 2 * half[k];
    double energy = 0;
    for (int i = 0; i < n; ++i) energy += frame[i] * window[i] * frame[i] * window[i];
    CHECK(std::abs(full - n * energy) / (n * energy) < 1e-9);
}

TEST_CASE("windows are symmetric with the expected endpoints") {
    const auto hann = make_window(WindowKind::Hann, 9);
    CHECK(hann.front() == doctest::Approx(0.0));
    CHECK(hann[4] == doctest::Approx(1.0));
    for (int i = 0; i < 9; ++i) CHECK(hann[i] == doctest::Approx(hann[8 - i]));
    const auto hamming = make_window(WindowKind::Hamming, 9);
    CHECK(hamming.front() == doctest::Approx(0.08));
    const auto rect = make_window(WindowKind::Rectangular, 4);
    CHECK(rect == std::vector<double>(4, 1.0));
    CHECK(parse_window_kind("HANN") == WindowKind::Hann);
    CHECK_THROWS_AS(parse_window_kind("blackman"), Error);
}

TEST_CASE("sign flip leaves the spectrogram unchanged") {
    auto clip = noise_clip(20000, 44100, 9);
    auto flipped = clip;
    for (auto& s : flipped.samples) s = -s;
    CHECK(compute_spectrogram(clip).values == compute_spectrogram(flipped).values);
}

TEST_CASE("image export: min-max scaling with round half up, flipped, grey") {
    Spectrogram spec;
    spec.n_bins = 2;
    spec.n_frames = 3;
    // bin 0 (DC) row, then bin 1 row.
    spec.values = {-100.0, -50.0, 0.0, -75.0, -25.0, -100.0};
    const auto img = to_image(spec);
    CHECK(img.width() == 3);
    CHECK(img.height() == 2);
    // Bottom row (y = 1) is DC.
    CHECK(img.channel(0, 1, 0) == 0);
    CHECK(img.channel(1, 1, 0) == 128); // 127.5 rounds up
    CHECK(img.channel(2, 1, 0) == 255);
    CHECK(img.channel(0, 0, 0) == 64);  // 63.75
    CHECK(img.channel(1, 0, 0) == 191); // 191.25
    for (int x = 0; x < 3; ++x) {
        for (int y = 0; y < 2; ++y) {
            CHECK(img.channel(x, y, 0) == img.channel(x, y, 1));
            CHECK(img.channel(x, y, 1) == img.channel(x, y, 2));
        }
    }
    spec.values.assign(6, -42.0);
    const auto flat = to_image(spec);
    for (auto b : flat.bytes()) CHECK(b == 0);
}

TEST_CASE("frame and time mapping") {
    Spectrogram spec;
    spec.n_frames = 734;
    spec.hop_s = 896.0 / 44100.0;
    spec.duration_s = 15.0;
    CHECK(frame_to_time(0, spec) == 0.0);
    CHECK(frame_to_time(100, spec) == doctest::Approx(2.0317460317));
    for (int f = 0; f < spec.n_frames; ++f) CHECK(time_to_frame(frame_to_time(f, spec), spec) == f);
    CHECK(time_to_frame(15.0, spec) == 733);
    CHECK_THROWS_AS(time_to_frame(-0.1, spec), Error);
    CHECK_THROWS_AS(time_to_frame(15.5, spec), Error);
    CHECK_THROWS_AS(frame_to_time(734, spec), Error);
    for (int f = 1; f < spec.n_frames; ++f) CHECK(frame_to_time(f, spec) > frame_to_time(f - 1, spec));
}

TEST_CASE("raw dump and sidecar carry the axis metadata") {
    const auto spec = compute_spectrogram(noise_clip(10000, 44100, 2));
    const auto dir = oracle::temp_dir("spec_raw");
    write_spectrogram_raw(dir / "a.f32", spec);
    CHECK(std::filesystem::file_size(dir / "a.f32") == spec.values.size() * 4);
    const auto j = nlohmann::json::parse(spectrogram_sidecar_json(spec, {}));
    CHECK(j["n_bins"] == spec.n_bins);
    CHECK(j["n_frames"] == spec.n_frames);
    CHECK(j["bin_hz"].get<double>() == spec.bin_hz);
    CHECK(j["hop_s"].get<double>() == spec.hop_s);
}
