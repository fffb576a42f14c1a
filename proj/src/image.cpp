#include "lungphase/image.hpp"

#include "lungphase/errors.hpp"
#include "lungphase/io_util.hpp"

#include <png.h>

#include <csetjmp>

#include <algorithm>
#include <cstring>
#include <stdexcept>

namespace lungphase {

Image3::Image3(int width, int height, Rgb fill) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
        throw std::invalid_argument("image dimensions must be positive");
    }
    pixels_.resize(static_cast<std::size_t>(width) * height * 3);
    for (std::size_t i = 0; i < pixels_.size(); i += 3) {
        pixels_[i] = fill.r;
        pixels_[i + 1] = fill.g;
        pixels_[i + 2] = fill.b;
    }
}

Rgb Image3::pixel(int x, int y) const {
    const auto i = index(x, y);
    return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
}

void Image3::set(int x, int y, Rgb color) {
    if (x < 0 || y < 0 || x >= width_ || y >= height_) {
        return;
    }
    const auto i = index(x, y);
    pixels_[i] = color.r;
    pixels_[i + 1] = color.g;
    pixels_[i + 2] = color.b;
}

void Image3::fill_rect(int x0, int y0, int x1, int y1, Rgb color) {
    x0 = std::max(x0, 0);
    y0 = std::max(y0, 0);
    x1 = std::min(x1, width_ - 1);
    y1 = std::min(y1, height_ - 1);
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            set(x, y, color);
        }
    }
}

namespace {

struct PngErrorState {
    std::string message;
};

void on_png_error(png_structp png, png_const_charp message) {
    if (auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png))) {
        state->message = message;
    }
    png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

void append_bytes(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

void flush_nothing(png_structp) {}

struct ReadCursor {
    const std::vector<std::uint8_t>* bytes;
    std::size_t pos;
};

void read_bytes(png_structp png, png_bytep data, png_size_t length) {
    auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
    if (cur->pos + length > cur->bytes->size()) {
        png_error(png, "unexpected end of PNG data");
    }
    std::memcpy(data, cur->bytes->data() + cur->pos, length);
    cur->pos += length;
}

// Kept free of objects with destructors between setjmp and longjmp.
bool write_png_rows(png_structp png, png_infop info, const Image3& image) {
    if (setjmp(png_jmpbuf(png))) {
        return false;
    }
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()),
                 static_cast<png_uint_32>(image.height()), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);
    png_write_info(png, info);
    const auto stride = static_cast<std::size_t>(image.width()) * 3;
    for (int y = 0; y < image.height(); ++y) {
        png_write_row(png, const_cast<png_bytep>(image.bytes().data() + y * stride));
    }
    png_write_end(png, nullptr);
    return true;
}

bool read_png_header(png_structp png, png_infop info, int* width, int* height) {
    if (setjmp(png_jmpbuf(png))) {
        return false;
    }
    png_read_info(png, info);
    png_set_strip_16(png);
    png_set_palette_to_rgb(png);
    png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);
    *width = static_cast<int>(png_get_image_width(png, info));
    *height = static_cast<int>(png_get_image_height(png, info));
    return true;
}

bool read_png_rows(png_structp png, std::uint8_t* pixels, int height, std::size_t stride) {
    if (setjmp(png_jmpbuf(png))) {
        return false;
    }
    for (int y = 0; y < height; ++y) {
        png_read_row(png, pixels + y * stride, nullptr);
    }
    return true;
}

} // namespace

std::vector<std::uint8_t> encode_png(const Image3& image) {
    if (image.empty()) {
        throw std::invalid_argument("cannot encode an empty image");
    }
    std::vector<std::uint8_t> out;
    PngErrorState state;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &state, on_png_error, on_png_warning);
    png_infop info = png_create_info_struct(png);
    png_set_write_fn(png, &out, append_bytes, flush_nothing);
    const bool ok = write_png_rows(png, info, image);
    png_destroy_write_struct(&png, &info);
    if (!ok) {
        throw Error(ErrorCode::IoFailure, "PNG encoding failed: " + state.message);
    }
    return out;
}

void write_png(const std::filesystem::path& path, const Image3& image) {
    write_file_atomic(path, encode_png(image));
}

Image3 decode_png(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
        throw Error(ErrorCode::ParseError, "not a PNG file");
    }
    PngErrorState state;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &state, on_png_error, on_png_warning);
    png_infop info = png_create_info_struct(png);
    ReadCursor cursor{&bytes, 0};
    png_set_read_fn(png, &cursor, read_bytes);
    int width = 0;
    int height = 0;
    Image3 image;
    bool ok = read_png_header(png, info, &width, &height);
    if (ok) {
        image = Image3(width, height);
        ok = read_png_rows(png, image.bytes().data(), height, static_cast<std::size_t>(width) * 3);
    }
    png_destroy_read_struct(&png, &info, nullptr);
    if (!ok) {
        throw Error(ErrorCode::ParseError, "PNG decoding failed: " + state.message);
    }
    return image;
}

} // namespace lungphase
