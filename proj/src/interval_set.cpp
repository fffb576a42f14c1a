#include "lungphase/interval_set.hpp"

#include "lungphase/errors.hpp"
#include "lungphase/io_util.hpp"

#include <algorithm>
#include <cmath>

namespace lungphase {

namespace {
constexpr double kDomainTolerance = 1e-9;
}

IntervalSet::IntervalSet(std::vector<Interval> intervals, double domain_s) : domain_(domain_s) {
    for (auto& iv : intervals) {
        iv.start = std::max(iv.start, 0.0);
        iv.end = std::min(iv.end, domain_s);
    }
    std::erase_if(intervals, [](const Interval& iv) { return !(iv.end > iv.start); });
    std::sort(intervals.begin(), intervals.end(),
              [](const Interval& a, const Interval& b) { return a.start < b.start; });
    for (const auto& iv : intervals) {
        if (!intervals_.empty() && iv.start <= intervals_.back().end) {
            intervals_.back().end = std::max(intervals_.back().end, iv.end);
        } else {
            intervals_.push_back(iv);
        }
    }
}

IntervalSet IntervalSet::from_boxes(std::span<const PhaseBox> boxes, double domain_s,
                                    std::optional<PhaseClass> only) {
    std::vector<Interval> intervals;
    intervals.reserve(boxes.size());
    for (const auto& b : boxes) {
        if (!only || b.phase == *only) {
            intervals.push_back({b.start_s, b.end_s});
        }
    }
    return IntervalSet(std::move(intervals), domain_s);
}

double IntervalSet::measure() const noexcept {
    double total = 0.0;
    for (const auto& iv : intervals_) total += iv.length();
    return total;
}

bool IntervalSet::contains(double t) const noexcept {
    auto it = std::upper_bound(intervals_.begin(), intervals_.end(), t,
                               [](double v, const Interval& iv) { return v < iv.start; });
    if (it == intervals_.begin()) return false;
    --it;
    return t >= it->start && t < it->end;
}

void IntervalSet::require_same_domain(const IntervalSet& other) const {
    if (std::abs(domain_ - other.domain_) > kDomainTolerance) {
        throw Error(ErrorCode::DomainMismatch, "interval domains differ: " + format_shortest(domain_) +
                                                   " s vs " + format_shortest(other.domain_) + " s");
    }
}

IntervalSet IntervalSet::complement() const {
    IntervalSet out(domain_);
    double cursor = 0.0;
    for (const auto& iv : intervals_) {
        if (iv.start > cursor) out.intervals_.push_back({cursor, iv.start});
        cursor = iv.end;
    }
    if (cursor < domain_) out.intervals_.push_back({cursor, domain_});
    return out;
}

IntervalSet IntervalSet::intersect(const IntervalSet& other) const {
    require_same_domain(other);
    IntervalSet out(domain_);
    std::size_t i = 0, j = 0;
    while (i < intervals_.size() && j < other.intervals_.size()) {
        const auto& a = intervals_[i];
        const auto& b = other.intervals_[j];
        const double lo = std::max(a.start, b.start);
        const double hi = std::min(a.end, b.end);
        if (hi > lo) out.intervals_.push_back({lo, hi});
        if (a.end < b.end) {
            ++i;
        } else {
            ++j;
        }
    }
    return out;
}

IntervalSet IntervalSet::unite(const IntervalSet& other) const {
    require_same_domain(other);
    std::vector<Interval> all = intervals_;
    all.insert(all.end(), other.intervals_.begin(), other.intervals_.end());
    return IntervalSet(std::move(all), domain_);
}

IntervalSet IntervalSet::subtract(const IntervalSet& other) const {
    return intersect(other.complement());
}

IntervalSet IntervalSet::truncated(double new_domain) const {
    const double d = std::min(domain_, new_domain);
    IntervalSet out(d);
    for (const auto& iv : intervals_) {
        if (iv.start >= d) break;
        out.intervals_.push_back({iv.start, std::min(iv.end, d)});
    }
    return out;
}

} // namespace lungphase
