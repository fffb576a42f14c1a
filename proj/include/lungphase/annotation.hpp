#pragma once

#include "lungphase/phase.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lungphase {

// Phases of one file from one source (an annotator or an algorithm).
struct Annotation {
    std::string file_id;
    double duration_s = 0.0;
    std::string source;
    std::vector<PhaseBox> boxes;

    bool operator==(const Annotation&) const = default;
};

using Warnings = std::vector<std::string>;

// Sorted by start; no same-class overlap; every box inside [0, duration].
// Cross-class overlap is reported through `warnings` only.
void validate_annotation(const Annotation& annotation, Warnings* warnings = nullptr);

// Maps interval labels to classes. Labels are trimmed and compared
// case-insensitively; an entry matches when the label starts with its key.
// Empty and unmapped labels are background unless `strict` is set, in which
// case an unmapped non-empty label is an UnknownLabel error.
struct ClassMap {
    std::vector<std::pair<std::string, PhaseClass>> prefixes{{"i", PhaseClass::Inspiration},
                                                             {"e", PhaseClass::Expiration}};
    bool strict = false;

    std::optional<PhaseClass> classify(std::string_view label) const;
};

// Text TextGrid (long or short form, UTF-8 or UTF-16 with BOM). All interval
// tiers contribute boxes; point tiers are skipped with a warning.
Annotation parse_textgrid(std::string_view text, const ClassMap& class_map = {},
                          std::string file_id = {}, Warnings* warnings = nullptr);
Annotation load_textgrid(const std::filesystem::path& path, const ClassMap& class_map = {},
                         Warnings* warnings = nullptr);

// One IntervalTier named "phases" with gaps filled by empty intervals.
std::string serialize_textgrid_long(const Annotation& annotation);
std::string serialize_textgrid_short(const Annotation& annotation);

// {"file", "duration_s", "source", "boxes": [{"class", "start_s", "end_s",
// "confidence"}]}, numbers with six decimals.
std::string write_annotation_json(const Annotation& annotation);
// Out-of-order boxes are sorted with a warning; invariant violations throw
// InvariantViolation, malformed JSON throws ParseError.
Annotation read_annotation_json(std::string_view text, Warnings* warnings = nullptr);
Annotation load_annotation_json(const std::filesystem::path& path, Warnings* warnings = nullptr);

// Loads every *.json (except manifest.json) and *.TextGrid in a directory, a
// single annotation file, or nothing else. Result is ordered by file id.
std::vector<Annotation> load_annotation_corpus(const std::filesystem::path& path,
                                               const ClassMap& class_map = {},
                                               Warnings* warnings = nullptr);

struct PhaseCounts {
    std::size_t inspiration = 0;
    std::size_t expiration = 0;
    bool operator==(const PhaseCounts&) const = default;
};

struct CorpusPhaseCounts {
    PhaseCounts total;
    std::map<std::string, PhaseCounts> by_source;
    std::size_t n_files = 0;
};

CorpusPhaseCounts count_phases(const std::vector<Annotation>& corpus);

} // namespace lungphase
