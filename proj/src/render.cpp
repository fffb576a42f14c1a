#include "lungphase/render.hpp"

#include "lungphase/errors.hpp"
#include "lungphase/io_util.hpp"

#include <array>
#include <cctype>
#include <cmath>

namespace lungphase {

void OverlayStyle::validate() const {
    if (stroke_px < 1) throw Error(ErrorCode::InvalidArgument, "stroke_px must be >= 1");
    if (inspiration_color == expiration_color) {
        throw Error(ErrorCode::InvalidArgument, "inspiration and expiration colors must differ");
    }
}

namespace {

struct Glyph {
    char c;
    std::array<std::uint8_t, 7> rows; // bit 4 is the leftmost column
};

constexpr Glyph kFont[] = {
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}}, {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}}, {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}}, {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}}, {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}}, {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}}, {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
    {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}}, {'D', {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C}},
    {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}}, {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
    {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}}, {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}}, {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
    {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}}, {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
    {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}}, {'N', {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11}},
    {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}}, {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
    {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}}, {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
    {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}}, {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
    {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}}, {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
    {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}}, {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
    {'Y', {0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04}}, {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}}, {',', {0x00, 0x00, 0x00, 0x00, 0x0C, 0x04, 0x08}},
    {':', {0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00}}, {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
    {'(', {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02}}, {')', {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08}},
    {'/', {0x00, 0x01, 0x02, 0x04, 0x08, 0x10, 0x00}}, {'_', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1F}},
    {'%', {0x18, 0x19, 0x02, 0x04, 0x08, 0x13, 0x03}}, {'+', {0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00}},
};

const Glyph* find_glyph(char c) {
    const char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (const auto& g : kFont) {
        if (g.c == u) return &g;
    }
    return nullptr;
}

void draw_outline(Image3& img, int x0, int x1, int stroke, Rgb color) {
    const int h = img.height();
    img.fill_rect(x0, 0, x0 + stroke - 1, h - 1, color);
    img.fill_rect(x1 - stroke + 1, 0, x1, h - 1, color);
    img.fill_rect(x0, 0, x1, stroke - 1, color);
    img.fill_rect(x0, h - stroke, x1, h - 1, color);
}

} // namespace

int text_width(std::string_view text, int scale) {
    return text.empty() ? 0 : static_cast<int>(text.size()) * 6 * scale - scale;
}

void draw_text(Image3& image, int x, int y, std::string_view text, Rgb color, int scale) {
    for (char c : text) {
        if (const Glyph* g = find_glyph(c)) {
            for (int row = 0; row < 7; ++row) {
                for (int col = 0; col < 5; ++col) {
                    if (g->rows[row] & (0x10 >> col)) {
                        image.fill_rect(x + col * scale, y + row * scale, x + (col + 1) * scale - 1,
                                        y + (row + 1) * scale - 1, color);
                    }
                }
            }
        }
        x += 6 * scale;
    }
}

std::pair<int, int> box_columns(const PhaseBox& box, const Spectrogram& spec) {
    return {time_to_frame(box.start_s, spec), time_to_frame(box.end_s, spec)};
}

OverlayResult render_overlay(const Spectrogram& spec,
                             const std::vector<std::pair<Annotation, OverlayStyle>>& layers) {
    OverlayResult result{to_image(spec), 0};
    for (const auto& [annotation, style] : layers) {
        style.validate();
        if (std::abs(annotation.duration_s - spec.duration_s) > 1e-6) {
            throw Error(ErrorCode::DomainMismatch,
                        "annotation '" + annotation.file_id + "' lasts " + format_shortest(annotation.duration_s) +
                            " s but the spectrogram covers " + format_shortest(spec.duration_s) + " s");
        }
        for (const auto& box : annotation.boxes) {
            validate_box(box, spec.duration_s);
            const auto [x0, x1] = box_columns(box, spec);
            if (std::floor(box.end_s / spec.hop_s) > spec.n_frames - 1) ++result.n_clamped;
            draw_outline(result.image, x0, x1, style.stroke_px, style.color(box.phase));
            if (style.label_confidence) {
                draw_text(result.image, x0 + style.stroke_px + 1, style.stroke_px + 1,
                          format_fixed(box.confidence, 2), style.color(box.phase));
            }
        }
    }
    return result;
}

Image3 render_kappa_chart(const std::vector<KappaRow>& rows) {
    constexpr int kRowH = 24;
    constexpr int kPlotW = 400;
    constexpr int kMargin = 10;
    constexpr int kAxisH = 20;
    const Rgb black{0, 0, 0};
    const Rgb grid{200, 200, 200};
    const Rgb point{30, 60, 200};

    int label_w = 0;
    for (const auto& r : rows) label_w = std::max(label_w, text_width(r.label));
    const int plot_x0 = kMargin + label_w + kMargin;
    const int width = plot_x0 + kPlotW + kMargin + 10;
    const int height = kMargin + static_cast<int>(rows.size()) * kRowH + kAxisH + kMargin;
    Image3 img(width, height, Rgb{255, 255, 255});

    const int plot_y1 = kMargin + static_cast<int>(rows.size()) * kRowH;
    auto to_x = [&](double k) {
        return plot_x0 + static_cast<int>(std::lround(std::clamp(k, 0.0, 1.0) * kPlotW));
    };
    for (double g : {0.2, 0.4, 0.6, 0.8}) img.fill_rect(to_x(g), kMargin, to_x(g), plot_y1, grid);
    img.fill_rect(plot_x0, kMargin, plot_x0, plot_y1, black);
    img.fill_rect(plot_x0, plot_y1, plot_x0 + kPlotW, plot_y1, black);
    for (int t = 0; t <= 5; ++t) {
        const double v = t / 5.0;
        const int x = to_x(v);
        img.fill_rect(x, plot_y1, x, plot_y1 + 3, black);
        const auto label = format_fixed(v, 1);
        draw_text(img, x - text_width(label) / 2, plot_y1 + 6, label, black);
    }

    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const int cy = kMargin + static_cast<int>(i) * kRowH + kRowH / 2;
        draw_text(img, kMargin, cy - 3, r.label, black);
        if (r.ci_low && r.ci_high) {
            const int xl = to_x(*r.ci_low);
            const int xh = to_x(*r.ci_high);
            img.fill_rect(std::min(xl, xh), cy, std::max(xl, xh), cy, black);
            img.fill_rect(xl, cy - 4, xl, cy + 4, black);
            img.fill_rect(xh, cy - 4, xh, cy + 4, black);
        }
        if (r.kappa) {
            const int x = to_x(*r.kappa);
            img.fill_rect(x - 3, cy - 3, x + 3, cy + 3, point);
        }
    }
    return img;
}

} // namespace lungphase
