#include "lungphase/audio.hpp"

#include "lungphase/errors.hpp"
#include "lungphase/io_util.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <optional>

namespace lungphase {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

struct FormatChunk {
    std::uint16_t format = 0;
    std::uint16_t channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t block_align = 0;
    std::uint16_t bits = 0;
};

FormatChunk parse_fmt(const std::uint8_t* p, std::uint32_t size) {
    if (size < 16) {
        throw Error(ErrorCode::CorruptHeader, "fmt chunk shorter than 16 bytes");
    }
    FormatChunk fmt;
    fmt.format = read_u16(p);
    fmt.channels = read_u16(p + 2);
    fmt.sample_rate = read_u32(p + 4);
    fmt.block_align = read_u16(p + 12);
    fmt.bits = read_u16(p + 14);
    if (fmt.format == kFormatExtensible) {
        if (size < 40) {
            throw Error(ErrorCode::CorruptHeader, "WAVE_FORMAT_EXTENSIBLE fmt chunk too short");
        }
        // The sub-format GUID starts with the plain format tag.
        fmt.format = read_u16(p + 24);
    }
    if (fmt.format != kFormatPcm && fmt.format != kFormatFloat) {
        throw Error(ErrorCode::UnsupportedEncoding,
                    "format tag " + std::to_string(fmt.format) + " is not PCM or IEEE float");
    }
    if (fmt.channels == 0) {
        throw Error(ErrorCode::CorruptHeader, "zero channels");
    }
    const bool pcm_ok = fmt.format == kFormatPcm &&
                        (fmt.bits == 8 || fmt.bits == 16 || fmt.bits == 24 || fmt.bits == 32);
    const bool float_ok = fmt.format == kFormatFloat && (fmt.bits == 32 || fmt.bits == 64);
    if (!pcm_ok && !float_ok) {
        throw Error(ErrorCode::UnsupportedEncoding,
                    std::to_string(fmt.bits) + "-bit samples are not supported");
    }
    if (fmt.block_align != fmt.channels * (fmt.bits / 8)) {
        throw Error(ErrorCode::CorruptHeader, "block align does not match channels * sample size");
    }
    if (fmt.sample_rate < static_cast<std::uint32_t>(kMinSampleRate) || fmt.sample_rate > 1'000'000) {
        throw Error(ErrorCode::UnsupportedEncoding,
                    "sample rate " + std::to_string(fmt.sample_rate) + " Hz outside [8000, 1000000]");
    }
    return fmt;
}

double decode_sample(const std::uint8_t* p, const FormatChunk& fmt) {
    if (fmt.format == kFormatFloat) {
        double v;
        if (fmt.bits == 32) {
            float f;
            std::uint32_t raw = read_u32(p);
            std::memcpy(&f, &raw, sizeof f);
            v = f;
        } else {
            std::uint64_t raw = static_cast<std::uint64_t>(read_u32(p)) |
                                (static_cast<std::uint64_t>(read_u32(p + 4)) << 32);
            std::memcpy(&v, &raw, sizeof v);
        }
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::CorruptHeader, "non-finite float sample");
        }
        return std::clamp(v, -1.0, 1.0);
    }
    switch (fmt.bits) {
    case 8:
        return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16:
        return static_cast<std::int16_t>(read_u16(p)) / 32768.0;
    case 24: {
        std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
        if (v & 0x800000) {
            v -= 0x1000000;
        }
        return v / 8388608.0;
    }
    default:
        return static_cast<std::int32_t>(read_u32(p)) / 2147483648.0;
    }
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
    }
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
    out.insert(out.end(), tag, tag + 4);
}

} // namespace

AudioClip decode_wav(std::span<const std::uint8_t> bytes, std::string source_id) {
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw Error(ErrorCode::CorruptHeader, "missing RIFF/WAVE signature");
    }
    std::optional<FormatChunk> fmt;
    const std::uint8_t* data = nullptr;
    std::size_t data_size = 0;
    bool have_data = false;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::uint8_t* chunk = bytes.data() + pos;
        const std::uint32_t size = read_u32(chunk + 4);
        const std::size_t body = pos + 8;
        const std::size_t available = bytes.size() - body;
        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (size > available) {
                throw Error(ErrorCode::CorruptHeader, "fmt chunk truncated");
            }
            fmt = parse_fmt(chunk + 8, size);
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            // Streaming writers leave the size as 0xFFFFFFFF; take what exists.
            data = chunk + 8;
            data_size = std::min<std::size_t>(size, available);
            have_data = true;
            if (fmt) {
                break;
            }
        }
        pos = body + static_cast<std::size_t>(size) + (size & 1u);
    }
    if (!fmt) {
        throw Error(ErrorCode::CorruptHeader, "no fmt chunk");
    }
    if (!have_data) {
        throw Error(ErrorCode::CorruptHeader, "no data chunk");
    }
    const std::size_t frames = data_size / fmt->block_align;
    if (frames == 0) {
        throw Error(ErrorCode::EmptyAudio, "data chunk holds no complete sample frames");
    }

    AudioClip clip;
    clip.sample_rate = static_cast<int>(fmt->sample_rate);
    clip.source_id = std::move(source_id);
    clip.samples.resize(frames);
    const std::size_t width = fmt->bits / 8;
    for (std::size_t f = 0; f < frames; ++f) {
        const std::uint8_t* frame = data + f * fmt->block_align;
        double sum = 0.0;
        for (std::size_t c = 0; c < fmt->channels; ++c) {
            sum += decode_sample(frame + c * width, *fmt);
        }
        clip.samples[f] = fmt->channels == 1 ? sum : sum / fmt->channels;
    }
    return clip;
}

AudioClip load_wav(const std::filesystem::path& path) {
    return decode_wav(read_file_bytes(path), path.stem().string());
}

std::vector<std::uint8_t> encode_wav(const AudioClip& clip, WavEncoding encoding) {
    const bool pcm = encoding == WavEncoding::Pcm16;
    const std::uint16_t bits = pcm ? 16 : 32;
    const std::uint32_t data_bytes = static_cast<std::uint32_t>(clip.samples.size() * (bits / 8));

    std::vector<std::uint8_t> out;
    out.reserve(44 + data_bytes);
    put_tag(out, "RIFF");
    put_u32(out, 36 + data_bytes);
    put_tag(out, "WAVE");
    put_tag(out, "fmt ");
    put_u32(out, 16);
    put_u16(out, pcm ? kFormatPcm : kFormatFloat);
    put_u16(out, 1);
    put_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
    put_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * (bits / 8));
    put_u16(out, bits / 8);
    put_u16(out, bits);
    put_tag(out, "data");
    put_u32(out, data_bytes);
    for (double s : clip.samples) {
        if (pcm) {
            const long v = std::clamp(std::lround(s * 32768.0), -32768L, 32767L);
            put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
        } else {
            const float f = static_cast<float>(std::clamp(s, -1.0, 1.0));
            std::uint32_t raw;
            std::memcpy(&raw, &f, sizeof raw);
            put_u32(out, raw);
        }
    }
    return out;
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip, WavEncoding encoding) {
    write_file_atomic(path, encode_wav(clip, encoding));
}

namespace {

constexpr int kZeroCrossings = 32;
constexpr int kTableResolution = 4096; // kernel samples per zero crossing
constexpr double kKaiserBeta = 8.0;

// sinc(u) * kaiser(u / K) for u in [0, K], sampled on a fine grid.
const std::vector<double>& kernel_table() {
    static const std::vector<double> table = [] {
        const int n = kZeroCrossings * kTableResolution + 2;
        std::vector<double> t(n);
        const double norm = std::cyl_bessel_i(0.0, kKaiserBeta);
        for (int i = 0; i < n; ++i) {
            const double u = static_cast<double>(i) / kTableResolution;
            const double x = u / kZeroCrossings;
            if (x >= 1.0) {
                t[i] = 0.0;
                continue;
            }
            const double sinc = u == 0.0 ? 1.0 : std::sin(M_PI * u) / (M_PI * u);
            const double window = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - x * x)) / norm;
            t[i] = sinc * window;
        }
        return t;
    }();
    return table;
}

double kernel(double u) {
    const auto& table = kernel_table();
    const double pos = std::abs(u) * kTableResolution;
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= table.size()) {
        return 0.0;
    }
    const double frac = pos - static_cast<double>(i);
    return table[i] + frac * (table[i + 1] - table[i]);
}

} // namespace

AudioClip resample(const AudioClip& clip, int target_rate) {
    if (target_rate < kMinSampleRate) {
        throw Error(ErrorCode::InvalidArgument, "target rate below 8000 Hz");
    }
    if (target_rate == clip.sample_rate) {
        return clip;
    }
    const std::int64_t source = clip.sample_rate;
    const std::int64_t target = target_rate;
    const auto in_len = static_cast<std::int64_t>(clip.samples.size());
    const std::int64_t out_len = (in_len * target + source / 2) / source;

    // Cutoff relative to the input Nyquist; kernel spans K zero crossings of
    // the lower rate.
    const double cutoff = std::min(1.0, static_cast<double>(target) / static_cast<double>(source));
    const double half_width = kZeroCrossings / cutoff;

    AudioClip out;
    out.sample_rate = target_rate;
    out.source_id = clip.source_id;
    out.samples.resize(static_cast<std::size_t>(out_len));
    for (std::int64_t n = 0; n < out_len; ++n) {
        const std::int64_t num = n * source;
        const std::int64_t base = num / target;
        const double pos = static_cast<double>(base) + static_cast<double>(num % target) / static_cast<double>(target);
        const auto first = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(pos - half_width)));
        const auto last = std::min<std::int64_t>(in_len - 1, static_cast<std::int64_t>(std::floor(pos + half_width)));
        double acc = 0.0;
        for (std::int64_t k = first; k <= last; ++k) {
            acc += clip.samples[static_cast<std::size_t>(k)] * kernel(cutoff * (pos - static_cast<double>(k)));
        }
        out.samples[static_cast<std::size_t>(n)] = std::clamp(acc * cutoff, -1.0, 1.0);
    }
    return out;
}

} // namespace lungphase
