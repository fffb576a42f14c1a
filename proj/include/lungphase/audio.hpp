#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace lungphase {

inline constexpr int kMinSampleRate = 8000;
inline constexpr int kCanonicalSampleRate = 44100;

// Mono recording with samples in [-1, 1].
struct AudioClip {
    std::vector<double> samples;
    int sample_rate = kCanonicalSampleRate;
    std::string source_id;

    double duration_s() const {
        return static_cast<double>(samples.size()) / static_cast<double>(sample_rate);
    }

    bool operator==(const AudioClip&) const = default;
};

// Decodes a RIFF/WAVE byte buffer. PCM 8/16/24/32-bit and IEEE float are
// accepted; integer samples are divided by the magnitude of the type's most
// negative value, and channels are averaged to mono.
AudioClip decode_wav(std::span<const std::uint8_t> bytes, std::string source_id = {});

// `source_id` defaults to the file stem.
AudioClip load_wav(const std::filesystem::path& path);

enum class WavEncoding { Pcm16, Float32 };

std::vector<std::uint8_t> encode_wav(const AudioClip& clip, WavEncoding encoding = WavEncoding::Pcm16);
void write_wav(const std::filesystem::path& path, const AudioClip& clip,
               WavEncoding encoding = WavEncoding::Pcm16);

// Kaiser-windowed sinc resampling. Output length is
// round(len * target / source); the passband is flat to within 0.1 dB up to
// 0.45 * min(source, target).
AudioClip resample(const AudioClip& clip, int target_rate);

} // namespace lungphase
