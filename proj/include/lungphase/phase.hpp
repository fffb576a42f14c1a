#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

namespace lungphase {

// Background is the absence of a box, never a class.
enum class PhaseClass { Inspiration, Expiration };

inline constexpr std::array<PhaseClass, 2> kPhaseClasses{PhaseClass::Inspiration,
                                                        PhaseClass::Expiration};

// "inspiration" / "expiration", the wire spelling.
std::string_view to_string(PhaseClass phase) noexcept;
// Display name, "Inspiration" / "Expiration".
std::string_view display_name(PhaseClass phase) noexcept;
std::optional<PhaseClass> parse_phase_class(std::string_view text) noexcept;
PhaseClass other(PhaseClass phase) noexcept;

// One breathing phase on the time axis; frequency extent is not modelled.
struct PhaseBox {
    PhaseClass phase = PhaseClass::Inspiration;
    double start_s = 0.0;
    double end_s = 0.0;
    double confidence = 1.0;

    double duration() const noexcept { return end_s - start_s; }
    bool operator==(const PhaseBox&) const = default;
};

// Throws Error(InvalidBox) unless 0 <= start < end (<= duration when given),
// all fields finite, and confidence in [0, 1].
void validate_box(const PhaseBox& box, std::optional<double> duration_s = std::nullopt);

// Total order used wherever deterministic sorting is needed: start, end,
// class, then confidence.
bool box_time_less(const PhaseBox& a, const PhaseBox& b) noexcept;
void sort_by_time(std::vector<PhaseBox>& boxes);

} // namespace lungphase
