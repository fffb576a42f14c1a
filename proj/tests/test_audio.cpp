#include <doctest.h>

#include "lungphase/audio.hpp"
#include "lungphase/errors.hpp"
#include "oracles.hpp"

#include <cmath>
#include <cstring>
#include <numbers>

using namespace lungphase;

namespace {

std::vector<std::uint8_t> pcm16(const std::vector<std::int16_t>& values) {
    std::vector<std::uint8_t> out;
    for (auto v : values) oracle::put_le(out, static_cast<std::uint16_t>(v), 2);
    return out;
}

ErrorCode code_of(const std::vector<std::uint8_t>& bytes) {
    try {
        decode_wav(bytes);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return ErrorCode::InvariantViolation;
}

} // namespace

TEST_CASE("16-bit extremes scale by 32768") {
    const auto clip = decode_wav(oracle::wav_bytes(1, 1, 44100, 16, pcm16({-32768, 32767, 0, 16384})), "x");
    REQUIRE(clip.samples.size() == 4);
    CHECK(clip.samples[0] == -1.0);
    CHECK(clip.samples[1] == doctest::Approx(0.99996948).epsilon(1e-8));
    CHECK(clip.samples[1] == 32767.0 / 32768.0);
    CHECK(clip.samples[2] == 0.0);
    CHECK(clip.samples[3] == 0.5);
    CHECK(clip.sample_rate == 44100);
    CHECK(clip.source_id == "x");
}

TEST_CASE("8, 24 and 32-bit PCM and float decode to the same amplitudes") {
    std::vector<std::uint8_t> p8{0, 128, 192};
    auto c8 = decode_wav(oracle::wav_bytes(1, 1, 8000, 8, p8));
    CHECK(c8.samples == std::vector<double>{-1.0, 0.0, 0.5});

    std::vector<std::uint8_t> p24;
    oracle::put_le(p24, 0x800000, 3);
    oracle::put_le(p24, 0x400000, 3);
    auto c24 = decode_wav(oracle::wav_bytes(1, 1, 8000, 24, p24));
    CHECK(c24.samples == std::vector<double>{-1.0, 0.5});

    std::vector<std::uint8_t> p32;
    oracle::put_le(p32, 0x80000000u, 4);
    oracle::put_le(p32, 0xC0000000u, 4);
    auto c32 = decode_wav(oracle::wav_bytes(1, 1, 8000, 32, p32));
    CHECK(c32.samples == std::vector<double>{-1.0, -0.5});

    std::vector<std::uint8_t> pf;
    for (float f : {0.25f, -0.75f}) {
        std::uint32_t raw;
        std::memcpy(&raw, &f, 4);
        oracle::put_le(pf, raw, 4);
    }
    auto cf = decode_wav(oracle::wav_bytes(3, 1, 8000, 32, pf));
    CHECK(cf.samples == std::vector<double>{0.25, -0.75});
}

TEST_CASE("stereo with opposite channels averages to silence") {
    std::vector<std::int16_t> frames;
    for (int i = 0; i < 100; ++i) {
        frames.push_back(16384);
        frames.push_back(-16384);
    }
    const auto clip = decode_wav(oracle::wav_bytes(1, 2, 44100, 16, pcm16(frames)));
    REQUIRE(clip.samples.size() == 100);
    for (double s : clip.samples) CHECK(s == 0.0);
}

TEST_CASE("15 s mono file has 661500 samples") {
    std::vector<std::int16_t> zeros(661500, 0);
    const auto clip = decode_wav(oracle::wav_bytes(1, 1, 44100, 16, pcm16(zeros)));
    CHECK(clip.samples.size() == 661500);
    CHECK(clip.duration_s() == 15.0);
}

TEST_CASE("malformed and unsupported inputs are rejected with specific codes") {
    CHECK(code_of({1, 2, 3}) == ErrorCode::CorruptHeader);
    CHECK(code_of(oracle::wav_bytes(2, 1, 44100, 4, {0, 0})) == ErrorCode::UnsupportedEncoding);
    CHECK(code_of(oracle::wav_bytes(1, 1, 44100, 16, {})) == ErrorCode::EmptyAudio);
    CHECK(code_of(oracle::wav_bytes(1, 1, 44100, 12, {0, 0})) == ErrorCode::UnsupportedEncoding);
    auto truncated = oracle::wav_bytes(1, 1, 44100, 16, pcm16({1, 2, 3}));
    truncated.resize(20);
    CHECK(code_of(truncated) == ErrorCode::CorruptHeader);
}

TEST_CASE("encode then decode 16-bit is exact on the PCM grid") {
    AudioClip clip;
    clip.sample_rate = 22050;
    for (int i = -5; i <= 5; ++i) clip.samples.push_back(i / 8.0);
    clip.samples.push_back(-1.0);
    const auto back = decode_wav(encode_wav(clip));
    CHECK(back.samples == clip.samples);
    CHECK(back.sample_rate == 22050);
    const auto backf = decode_wav(encode_wav(clip, WavEncoding::Float32));
    CHECK(backf.samples == clip.samples);
}

TEST_CASE("resample to the same rate is the identity") {
    AudioClip clip{{0.1, -0.2, 0.3}, 16000, "id"};
    CHECK(resample(clip, 16000) == clip);
}

TEST_CASE("resampled sine matches the analytic sine") {
    AudioClip clip;
    clip.sample_rate = 22050;
    const double f = 440.0;
    for (int i = 0; i < 22050; ++i) clip.samples.push_back(0.5 * std::sin(2 * std::numbers::pi * f * i / 22050.0));
    const auto up = resample(clip, 44100);
    CHECK(std::abs(static_cast<long>(up.samples.size()) - 44100) <= 1);
    double worst = 0;
    for (std::size_t i = 100; i + 100 < up.samples.size(); ++i) {
        const double expected = 0.5 * std::sin(2 * std::numbers::pi * f * i / 44100.0);
        worst = std::max(worst, std::abs(up.samples[i] - expected));
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("up then down resampling reconstructs a band-limited signal") {
    AudioClip clip;
    clip.sample_rate = 16000;
    for (int i = 0; i < 16000; ++i) {
        const double t = i / 16000.0;
        clip.samples.push_back(0.3 * std::sin(2 * std::numbers::pi * 300 * t) +
                               0.2 * std::sin(2 * std::numbers::pi * 2100 * t + 1.0));
    }
    const auto round_trip = resample(resample(clip, 32000), 16000);
    REQUIRE(round_trip.samples.size() == clip.samples.size());
    double worst = 0;
    for (std::size_t i = 100; i + 100 < clip.samples.size(); ++i) {
        worst = std::max(worst, std::abs(round_trip.samples[i] - clip.samples[i]));
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("resample length follows round(len * target / source)") {
    AudioClip clip;
    clip.sample_rate = 44100;
    clip.samples.assign(1000, 0.0);
    CHECK(resample(clip, 8000).samples.size() == 181); // 181.40
    CHECK(resample(clip, 48000).samples.size() == 1088); // 1088.43
}
