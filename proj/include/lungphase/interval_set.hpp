#pragma once

#include "lungphase/phase.hpp"

#include <optional>
#include <span>
#include <vector>

namespace lungphase {

struct Interval {
    double start = 0.0;
    double end = 0.0;

    double length() const noexcept { return end - start; }
    bool operator==(const Interval&) const = default;
};

// Sorted, disjoint, half-open intervals inside [0, domain). Touching or
// overlapping inputs are merged on construction.
class IntervalSet {
public:
    IntervalSet() = default;
    explicit IntervalSet(double domain_s) : domain_(domain_s) {}
    IntervalSet(std::vector<Interval> intervals, double domain_s);

    static IntervalSet from_boxes(std::span<const PhaseBox> boxes, double domain_s,
                                  std::optional<PhaseClass> only = std::nullopt);

    double domain() const noexcept { return domain_; }
    const std::vector<Interval>& intervals() const noexcept { return intervals_; }
    bool empty() const noexcept { return intervals_.empty(); }
    double measure() const noexcept;
    bool contains(double t) const noexcept;

    // Set algebra within the shared domain; mismatched domains throw
    // Error(DomainMismatch).
    IntervalSet complement() const;
    IntervalSet intersect(const IntervalSet& other) const;
    IntervalSet unite(const IntervalSet& other) const;
    IntervalSet subtract(const IntervalSet& other) const;

    // Restriction to [0, min(domain, new_domain)).
    IntervalSet truncated(double new_domain) const;

    bool operator==(const IntervalSet&) const = default;

private:
    void require_same_domain(const IntervalSet& other) const;

    double domain_ = 0.0;
    std::vector<Interval> intervals_;
};

} // namespace lungphase
