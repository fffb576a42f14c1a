#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace lungphase {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

// 8-bit RGB raster, row-major from the top-left corner.
class Image3 {
public:
    Image3() = default;
    Image3(int width, int height, Rgb fill = {});

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return pixels_.empty(); }

    std::uint8_t channel(int x, int y, int c) const { return pixels_[index(x, y) + c]; }
    Rgb pixel(int x, int y) const;
    void set(int x, int y, Rgb color);
    void fill_rect(int x0, int y0, int x1, int y1, Rgb color); // inclusive, clipped

    const std::vector<std::uint8_t>& bytes() const noexcept { return pixels_; }
    std::vector<std::uint8_t>& bytes() noexcept { return pixels_; }

    bool operator==(const Image3&) const = default;

private:
    std::size_t index(int x, int y) const {
        return (static_cast<std::size_t>(y) * width_ + x) * 3;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> pixels_;
};

// Deterministic PNG encoding (no timestamps, fixed compression settings).
std::vector<std::uint8_t> encode_png(const Image3& image);
void write_png(const std::filesystem::path& path, const Image3& image);
Image3 decode_png(const std::vector<std::uint8_t>& bytes);

} // namespace lungphase
