#include "lungphase/postprocess.hpp"

#include "lungphase/agreement.hpp"
#include "lungphase/errors.hpp"
#include "lungphase/io_util.hpp"

#include <algorithm>
#include <tuple>

namespace lungphase {

void PostprocessParams::validate() const {
    auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
    if (!in_unit(confidence_min) || !in_unit(duplicate_iou) || !in_unit(small_overlap_max_frac)) {
        throw Error(ErrorCode::InvalidArgument, "post-processing parameters must lie in (0, 1]");
    }
}

PostprocessTrace& PostprocessTrace::operator+=(const PostprocessTrace& other) {
    n_pruned += other.n_pruned;
    n_duplicates_removed += other.n_duplicates_removed;
    n_overlaps_resolved += other.n_overlaps_resolved;
    n_large_overlaps += other.n_large_overlaps;
    return *this;
}

std::pair<std::vector<PhaseBox>, std::size_t> prune_low_confidence(std::vector<PhaseBox> boxes,
                                                                   const PostprocessParams& params) {
    const std::size_t before = boxes.size();
    std::erase_if(boxes, [&](const PhaseBox& b) { return b.confidence < params.confidence_min; });
    return {std::move(boxes), before - boxes.size()};
}

std::pair<std::vector<PhaseBox>, std::size_t> suppress_duplicates(std::vector<PhaseBox> boxes,
                                                                  const PostprocessParams& params) {
    std::vector<PhaseBox> by_priority = boxes;
    std::stable_sort(by_priority.begin(), by_priority.end(), [](const PhaseBox& a, const PhaseBox& b) {
        return std::tuple(-a.confidence, a.start_s, -a.duration(), a.phase) <
               std::tuple(-b.confidence, b.start_s, -b.duration(), b.phase);
    });
    std::vector<PhaseBox> kept;
    for (const auto& box : by_priority) {
        const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const PhaseBox& k) {
            if (params.duplicates_within_class_only && k.phase != box.phase) return false;
            return jaccard({k.start_s, k.end_s}, {box.start_s, box.end_s}) > params.duplicate_iou;
        });
        if (!duplicate) kept.push_back(box);
    }
    const std::size_t removed = boxes.size() - kept.size();
    sort_by_time(kept);
    return {std::move(kept), removed};
}

std::pair<std::vector<PhaseBox>, std::size_t> resolve_small_overlaps(std::vector<PhaseBox> boxes,
                                                                     const PostprocessParams& params,
                                                                     std::size_t* n_large) {
    std::size_t adjusted = 0;
    std::size_t large = 0;
    for (std::size_t i = 1; i < boxes.size(); ++i) {
        auto& earlier = boxes[i - 1];
        auto& later = boxes[i];
        const double overlap = earlier.end_s - later.start_s;
        if (!(overlap > 0.0)) continue;
        if (overlap > params.small_overlap_max_frac * std::min(earlier.duration(), later.duration())) {
            ++large;
        }
        // Both edges move to the same microsecond-grid point, so the pair
        // ends up touching exactly.
        const double cut = quantize_us(earlier.end_s - overlap / 2.0);
        if (!(cut > earlier.start_s) || !(later.end_s > cut)) {
            throw Error(ErrorCode::DegeneratePhase,
                        "splitting the overlap at " + format_shortest(cut) + " s collapses a phase");
        }
        earlier.end_s = cut;
        later.start_s = cut;
        ++adjusted;
    }
    for (std::size_t i = 1; i < boxes.size(); ++i) {
        if (boxes[i].start_s < boxes[i - 1].end_s || !(boxes[i].duration() > 0.0)) {
            throw Error(ErrorCode::DegeneratePhase,
                        "nested phases near " + format_shortest(boxes[i].start_s) + " s cannot be separated");
        }
    }
    if (n_large) *n_large = large;
    return {std::move(boxes), adjusted};
}

std::pair<std::vector<PhaseBox>, PostprocessTrace> postprocess(std::vector<PhaseBox> boxes,
                                                               const PostprocessParams& params) {
    params.validate();
    PostprocessTrace trace;
    auto [pruned, n_pruned] = prune_low_confidence(std::move(boxes), params);
    trace.n_pruned = n_pruned;
    auto [unique, n_dupes] = suppress_duplicates(std::move(pruned), params);
    trace.n_duplicates_removed = n_dupes;
    sort_by_time(unique);
    auto [resolved, n_resolved] = resolve_small_overlaps(std::move(unique), params, &trace.n_large_overlaps);
    trace.n_overlaps_resolved = n_resolved;
    return {std::move(resolved), trace};
}

} // namespace lungphase
