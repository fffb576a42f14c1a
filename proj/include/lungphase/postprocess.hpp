#pragma once

#include "lungphase/phase.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace lungphase {

struct PostprocessParams {
    double confidence_min = 0.5;
    double duplicate_iou = 0.5;
    // Only used to count overlaps larger than this fraction of the shorter
    // box; every residual overlap is resolved regardless.
    double small_overlap_max_frac = 0.10;
    bool duplicates_within_class_only = false;

    void validate() const;
};

struct PostprocessTrace {
    std::size_t n_pruned = 0;
    std::size_t n_duplicates_removed = 0;
    std::size_t n_overlaps_resolved = 0;
    std::size_t n_large_overlaps = 0;

    PostprocessTrace& operator+=(const PostprocessTrace& other);
    bool operator==(const PostprocessTrace&) const = default;
};

// Drops boxes with confidence strictly below confidence_min; order kept.
std::pair<std::vector<PhaseBox>, std::size_t> prune_low_confidence(std::vector<PhaseBox> boxes,
                                                                   const PostprocessParams& params);

// Greedy suppression: boxes are visited by descending confidence (ties:
// earlier start, then longer), and a box is dropped when its temporal
// Jaccard with an already kept box exceeds duplicate_iou.
std::pair<std::vector<PhaseBox>, std::size_t> suppress_duplicates(std::vector<PhaseBox> boxes,
                                                                  const PostprocessParams& params);

// Input sorted by start. Each successive overlapping pair is split at the
// midpoint of the overlap, left to right. Throws Error(DegeneratePhase) if a
// box would vanish or an overlap cannot be removed this way.
std::pair<std::vector<PhaseBox>, std::size_t> resolve_small_overlaps(std::vector<PhaseBox> boxes,
                                                                     const PostprocessParams& params,
                                                                     std::size_t* n_large = nullptr);

// prune -> suppress duplicates -> sort by start -> resolve overlaps.
std::pair<std::vector<PhaseBox>, PostprocessTrace> postprocess(std::vector<PhaseBox> boxes,
                                                               const PostprocessParams& params = {});

} // namespace lungphase
