#include "lungphase/phase.hpp"

#include "lungphase/errors.hpp"
#include "lungphase/io_util.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace lungphase {

std::string_view to_string(PhaseClass phase) noexcept {
    return phase == PhaseClass::Inspiration ? "inspiration" : "expiration";
}

std::string_view display_name(PhaseClass phase) noexcept {
    return phase == PhaseClass::Inspiration ? "Inspiration" : "Expiration";
}

std::optional<PhaseClass> parse_phase_class(std::string_view text) noexcept {
    if (text == "inspiration") return PhaseClass::Inspiration;
    if (text == "expiration") return PhaseClass::Expiration;
    return std::nullopt;
}

PhaseClass other(PhaseClass phase) noexcept {
    return phase == PhaseClass::Inspiration ? PhaseClass::Expiration : PhaseClass::Inspiration;
}

void validate_box(const PhaseBox& box, std::optional<double> duration_s) {
    auto describe = [&] {
        return std::string(to_string(box.phase)) + " [" + format_shortest(box.start_s) + ", " +
               format_shortest(box.end_s) + "] confidence " + format_shortest(box.confidence);
    };
    if (!std::isfinite(box.start_s) || !std::isfinite(box.end_s) || !std::isfinite(box.confidence)) {
        throw Error(ErrorCode::InvalidBox, "non-finite field in " + describe());
    }
    if (box.start_s < 0.0) {
        throw Error(ErrorCode::InvalidBox, "negative start in " + describe());
    }
    if (!(box.end_s > box.start_s)) {
        throw Error(ErrorCode::InvalidBox, "end_s <= start_s in " + describe());
    }
    if (box.confidence < 0.0 || box.confidence > 1.0) {
        throw Error(ErrorCode::InvalidBox, "confidence outside [0,1] in " + describe());
    }
    if (duration_s && box.end_s > *duration_s + 1e-9) {
        throw Error(ErrorCode::InvalidBox,
                    "box ends after file duration " + format_shortest(*duration_s) + ": " + describe());
    }
}

bool box_time_less(const PhaseBox& a, const PhaseBox& b) noexcept {
    return std::tuple(a.start_s, a.end_s, a.phase, a.confidence) <
           std::tuple(b.start_s, b.end_s, b.phase, b.confidence);
}

void sort_by_time(std::vector<PhaseBox>& boxes) {
    std::stable_sort(boxes.begin(), boxes.end(), box_time_less);
}

} // namespace lungphase
