#pragma once

#include "lungphase/annotation.hpp"
#include "lungphase/image.hpp"
#include "lungphase/report.hpp"
#include "lungphase/spectrogram.hpp"

#include <string_view>
#include <utility>
#include <vector>

namespace lungphase {

struct OverlayStyle {
    Rgb inspiration_color{220, 40, 40};
    Rgb expiration_color{230, 200, 30};
    int stroke_px = 2;
    bool label_confidence = false;

    const Rgb& color(PhaseClass phase) const {
        return phase == PhaseClass::Inspiration ? inspiration_color : expiration_color;
    }
    void validate() const;
};

struct OverlayResult {
    Image3 image;
    // Boxes whose right edge fell past the last frame and was pinned to it.
    std::size_t n_clamped = 0;
};

// Pixel columns [x0, x1] of a box: time_to_frame of its start and end.
std::pair<int, int> box_columns(const PhaseBox& box, const Spectrogram& spec);

// Spectrogram backdrop with every box outlined over the full image height,
// layers drawn in the given order. Each annotation must match the
// spectrogram's duration (DomainMismatch).
OverlayResult render_overlay(const Spectrogram& spec,
                             const std::vector<std::pair<Annotation, OverlayStyle>>& layers);

// Point-and-error-bar chart over kappa in [0, 1] with gridlines at the
// interpretation band edges. Rows with undefined kappa are labelled only.
Image3 render_kappa_chart(const std::vector<KappaRow>& rows);

// 5x7 bitmap text; lowercase is drawn as uppercase, unknown glyphs as blanks.
void draw_text(Image3& image, int x, int y, std::string_view text, Rgb color, int scale = 1);
int text_width(std::string_view text, int scale = 1);

} // namespace lungphase
