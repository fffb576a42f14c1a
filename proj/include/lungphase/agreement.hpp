#pragma once

#include "lungphase/annotation.hpp"
#include "lungphase/interval_set.hpp"
#include "lungphase/phase.hpp"
#include "lungphase/random.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lungphase {

// |a ∩ b| / |a ∪ b|; 0 for disjoint or doubly degenerate intervals.
double jaccard(const Interval& a, const Interval& b) noexcept;

// ---------------------------------------------------------------------------
// Box-level agreement
// ---------------------------------------------------------------------------

struct BoxMatch {
    std::size_t a_index;
    std::size_t b_index;
    double jaccard;
};

struct BoxCounts {
    std::size_t matches = 0;
    std::size_t n_a = 0;
    std::size_t n_b = 0;

    // 2M / (n_A + n_B); 1 when both sides are empty.
    double agreement() const noexcept;
    std::optional<double> recall_a() const noexcept; // M / n_A
    std::optional<double> recall_b() const noexcept; // M / n_B

    BoxCounts& operator+=(const BoxCounts& other);
    bool operator==(const BoxCounts&) const = default;
};

struct Method1Result {
    BoxCounts inspiration;
    BoxCounts expiration;
    BoxCounts both;
    std::vector<BoxMatch> matches;
    std::vector<std::size_t> unmatched_a;
    std::vector<std::size_t> unmatched_b;

    const BoxCounts& for_class(std::optional<PhaseClass> phase) const;
};

inline constexpr double kMatchJaccard = 0.5;

// One-to-one matching of same-class pairs with Jaccard > 0.5, taken
// greedily by descending Jaccard (ties: earlier A start, then earlier B start).
Method1Result match_boxes(const std::vector<PhaseBox>& a, const std::vector<PhaseBox>& b);

// ---------------------------------------------------------------------------
// Continuous-time agreement
// ---------------------------------------------------------------------------

// Seconds of each region. With the default (as-published) roles,
// fp = |A − B| and fn = |¬A − ¬B| = |B − A|; `conventional` swaps them.
struct ConfusionMeasure {
    double tp_s = 0.0;
    double fp_s = 0.0;
    double tn_s = 0.0;
    double fn_s = 0.0;

    double total() const noexcept { return tp_s + fp_s + tn_s + fn_s; }
    ConfusionMeasure& operator+=(const ConfusionMeasure& other);
};

ConfusionMeasure confusion(const IntervalSet& a, const IntervalSet& b, bool conventional_roles = false);

struct ScreeningRates {
    std::optional<double> sensitivity; // tp / (tp + fn)
    std::optional<double> specificity; // tn / (tn + fp)
};

ScreeningRates screening_rates(const ConfusionMeasure& m);

// Fraction of the domain on which A and B agree, (tp + tn) / T.
double observed_agreement(const IntervalSet& a, const IntervalSet& b);

enum class KappaStatus { Ok, DegenerateChance, InsufficientFiles };
std::string_view to_string(KappaStatus status) noexcept;

// Landis & Koch reading of a kappa value.
std::string_view interpret_kappa(double kappa) noexcept;

struct KappaResult {
    double p_o = 0.0;
    double p_e = 0.0;
    std::optional<double> kappa;
    std::optional<double> ci_low;
    std::optional<double> ci_high;
    std::size_t n_permutations = 0;
    std::size_t n_bootstrap = 0;
    std::size_t n_degenerate_replicates = 0;
    std::uint64_t seed = 0;
    KappaStatus status = KappaStatus::Ok;
    bool ci_excludes_estimate = false;

    std::string interpretation() const;
};

using IntervalPair = std::pair<IntervalSet, IntervalSet>;

// Agreement statistic for (A_i, B_j) as seconds agreed and seconds compared,
// both truncated to the shorter domain.
struct AgreementCell {
    double agreed_s = 0.0;
    double domain_s = 0.0;
};

// cells[i][j] pairs A_i with B_j.
using AgreementMatrix = std::vector<std::vector<AgreementCell>>;
AgreementMatrix agreement_matrix(const std::vector<IntervalPair>& pairs);

// Uniformly random permutation of [0, n) without fixed points (n >= 2),
// by rejection sampling.
std::vector<std::size_t> random_derangement(std::size_t n, Rng& rng);

// p_o pools agreed time over all files; p_e is the mean of the same
// statistic over `n_permutations` random re-pairings A_i with B_pi(i).
// A p_o of exactly 1 yields kappa 1 even when chance agreement is also 1.
KappaResult pseudo_kappa(const std::vector<IntervalPair>& pairs, std::size_t n_permutations = 100,
                         std::uint64_t seed = 0);

struct BootstrapInterval {
    std::optional<double> low;
    std::optional<double> high;
    std::size_t n_degenerate = 0;
    std::vector<double> replicates; // sorted
};

// Percentile bootstrap over files: each replicate resamples file pairs with
// replacement and recomputes pseudo-kappa with its own permutation draws.
// Replicates are seeded by index, so results do not depend on `jobs`.
BootstrapInterval bootstrap_ci(const std::vector<IntervalPair>& pairs, std::size_t n_bootstrap = 1000,
                               std::size_t n_permutations = 100, std::uint64_t seed = 0,
                               unsigned jobs = 1, double alpha = 0.05);

// Linear interpolation between order statistics of sorted data (type 7).
double percentile_sorted(const std::vector<double>& sorted, double q);

// ---------------------------------------------------------------------------
// Corpus evaluation
// ---------------------------------------------------------------------------

struct MetricConfig {
    std::size_t n_permutations = 100;
    std::size_t n_bootstrap = 1000;
    std::uint64_t seed = 42;
    bool conventional_roles = false;
    unsigned jobs = 1;
};

// Index 0 = Inspiration, 1 = Expiration, 2 = both phases (union of the two).
enum class Category { Inspiration = 0, Expiration = 1, Both = 2 };
inline constexpr std::size_t kCategoryCount = 3;
std::string_view display_name(Category category) noexcept;
std::optional<PhaseClass> category_class(Category category) noexcept;

struct RateAggregate {
    std::optional<double> sensitivity; // duration-weighted over defined files
    std::optional<double> specificity;
    std::size_t n_sensitivity_undefined = 0;
    std::size_t n_specificity_undefined = 0;
};

struct CategoryReport {
    BoxCounts boxes;
    ConfusionMeasure confusion;
    RateAggregate rates;
    KappaResult kappa;
};

struct FileReport {
    std::string file_id;
    double duration_s = 0.0;
    BoxCounts boxes[kCategoryCount];
    ConfusionMeasure confusion[kCategoryCount];
    ScreeningRates rates[kCategoryCount];
};

struct AgreementReport {
    std::string reference_label;
    std::string hypothesis_label;
    bool conventional_roles = false;
    CategoryReport categories[kCategoryCount];
    std::vector<FileReport> files;

    const CategoryReport& category(Category c) const { return categories[static_cast<int>(c)]; }
};

// Reference and hypothesis corpora must cover the same file ids (MissingFile)
// with equal durations (DomainMismatch).
AgreementReport evaluate_corpus(const std::vector<Annotation>& reference,
                                const std::vector<Annotation>& hypothesis, const MetricConfig& config,
                                std::string reference_label = "Reference",
                                std::string hypothesis_label = "Algorithm");

} // namespace lungphase
