#include "lungphase/agreement.hpp"

#include "lungphase/errors.hpp"
#include "lungphase/io_util.hpp"
#include "lungphase/parallel.hpp"
#include "lungphase/random.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

namespace lungphase {

double jaccard(const Interval& a, const Interval& b) noexcept {
    const double inter = std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
    const double uni = a.length() + b.length() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

double BoxCounts::agreement() const noexcept {
    const std::size_t total = n_a + n_b;
    return total == 0 ? 1.0 : 2.0 * static_cast<double>(matches) / static_cast<double>(total);
}

std::optional<double> BoxCounts::recall_a() const noexcept {
    if (n_a == 0) return std::nullopt;
    return static_cast<double>(matches) / static_cast<double>(n_a);
}

std::optional<double> BoxCounts::recall_b() const noexcept {
    if (n_b == 0) return std::nullopt;
    return static_cast<double>(matches) / static_cast<double>(n_b);
}

BoxCounts& BoxCounts::operator+=(const BoxCounts& other) {
    matches += other.matches;
    n_a += other.n_a;
    n_b += other.n_b;
    return *this;
}

const BoxCounts& Method1Result::for_class(std::optional<PhaseClass> phase) const {
    if (!phase) return both;
    return *phase == PhaseClass::Inspiration ? inspiration : expiration;
}

Method1Result match_boxes(const std::vector<PhaseBox>& a, const std::vector<PhaseBox>& b) {
    std::vector<BoxMatch> candidates;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (a[i].phase != b[j].phase) continue;
            const double j_index = jaccard({a[i].start_s, a[i].end_s}, {b[j].start_s, b[j].end_s});
            if (j_index > kMatchJaccard) candidates.push_back({i, j, j_index});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [&](const BoxMatch& x, const BoxMatch& y) {
        return std::tuple(-x.jaccard, a[x.a_index].start_s, b[x.b_index].start_s, x.a_index, x.b_index) <
               std::tuple(-y.jaccard, a[y.a_index].start_s, b[y.b_index].start_s, y.a_index, y.b_index);
    });

    Method1Result result;
    std::vector<bool> used_a(a.size(), false);
    std::vector<bool> used_b(b.size(), false);
    for (const auto& c : candidates) {
        if (used_a[c.a_index] || used_b[c.b_index]) continue;
        used_a[c.a_index] = used_b[c.b_index] = true;
        result.matches.push_back(c);
        auto& counts = a[c.a_index].phase == PhaseClass::Inspiration ? result.inspiration : result.expiration;
        ++counts.matches;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto& counts = a[i].phase == PhaseClass::Inspiration ? result.inspiration : result.expiration;
        ++counts.n_a;
        if (!used_a[i]) result.unmatched_a.push_back(i);
    }
    for (std::size_t j = 0; j < b.size(); ++j) {
        auto& counts = b[j].phase == PhaseClass::Inspiration ? result.inspiration : result.expiration;
        ++counts.n_b;
        if (!used_b[j]) result.unmatched_b.push_back(j);
    }
    result.both = result.inspiration;
    result.both += result.expiration;
    return result;
}

ConfusionMeasure& ConfusionMeasure::operator+=(const ConfusionMeasure& other) {
    tp_s += other.tp_s;
    fp_s += other.fp_s;
    tn_s += other.tn_s;
    fn_s += other.fn_s;
    return *this;
}

ConfusionMeasure confusion(const IntervalSet& a, const IntervalSet& b, bool conventional_roles) {
    const IntervalSet not_a = a.complement();
    const IntervalSet not_b = b.complement();
    ConfusionMeasure m;
    m.tp_s = a.intersect(b).measure();
    const double a_minus_b = a.subtract(b).measure();
    m.tn_s = not_a.intersect(not_b).measure();
    const double not_a_minus_not_b = not_a.subtract(not_b).measure();
    m.fp_s = conventional_roles ? not_a_minus_not_b : a_minus_b;
    m.fn_s = conventional_roles ? a_minus_b : not_a_minus_not_b;
    return m;
}

ScreeningRates screening_rates(const ConfusionMeasure& m) {
    ScreeningRates r;
    if (m.tp_s + m.fn_s > 0.0) r.sensitivity = m.tp_s / (m.tp_s + m.fn_s);
    if (m.tn_s + m.fp_s > 0.0) r.specificity = m.tn_s / (m.tn_s + m.fp_s);
    return r;
}

namespace {

// Agreed time as the domain minus the symmetric difference; exact 1.0 for
// identical sets.
double agreed_seconds(const IntervalSet& a, const IntervalSet& b) {
    return a.domain() - a.subtract(b).measure() - b.subtract(a).measure();
}

constexpr double kDegenerateChance = 1e-9;

std::optional<double> kappa_value(double p_o, double p_e, KappaStatus& status) {
    status = KappaStatus::Ok;
    if (p_o == 1.0) return 1.0;
    if (1.0 - p_e < kDegenerateChance) {
        status = KappaStatus::DegenerateChance;
        return std::nullopt;
    }
    return (p_o - p_e) / (1.0 - p_e);
}

struct KappaParts {
    double p_o;
    double p_e;
};

// A re-pairing of the slots in `idx` that, where possible, never pairs a slot
// with a copy of the same file. Bootstrap replicates repeat files, and pairing
// a file with its own copy would count observed agreement as chance.
std::vector<std::size_t> file_derangement(const std::vector<std::size_t>& idx, Rng& rng) {
    auto perm = random_derangement(idx.size(), rng);
    const std::size_t n = idx.size();
    auto clash = [&](std::size_t k, std::size_t target) { return idx[k] == idx[target]; };
    for (std::size_t k = 0; k < n; ++k) {
        if (!clash(k, perm[k])) continue;
        const std::size_t offset = static_cast<std::size_t>(rng.below(n));
        for (std::size_t step = 0; step < n; ++step) {
            const std::size_t j = (offset + step) % n;
            if (j != k && !clash(k, perm[j]) && !clash(j, perm[k])) {
                std::swap(perm[k], perm[j]);
                break;
            }
        }
    }
    return perm;
}

// p_o and p_e for the files `idx` (indices into the matrix, repeats allowed).
KappaParts kappa_parts(const AgreementMatrix& m, const std::vector<std::size_t>& idx,
                       std::size_t n_permutations, Rng& rng) {
    std::vector<std::size_t> distinct(idx);
    std::sort(distinct.begin(), distinct.end());
    const bool repeats = std::adjacent_find(distinct.begin(), distinct.end()) != distinct.end();
    double agreed = 0.0, total = 0.0;
    for (std::size_t k : idx) {
        agreed += m[k][k].agreed_s;
        total += m[k][k].domain_s;
    }
    double chance_sum = 0.0;
    for (std::size_t p = 0; p < n_permutations; ++p) {
        const auto perm = repeats ? file_derangement(idx, rng) : random_derangement(idx.size(), rng);
        double pa = 0.0, pt = 0.0;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            const auto& cell = m[idx[k]][idx[perm[k]]];
            pa += cell.agreed_s;
            pt += cell.domain_s;
        }
        chance_sum += pt > 0.0 ? pa / pt : 0.0;
    }
    return {total > 0.0 ? agreed / total : 0.0,
            n_permutations > 0 ? chance_sum / static_cast<double>(n_permutations) : 0.0};
}

bool interval_set_less(const IntervalSet& x, const IntervalSet& y) {
    if (x.domain() != y.domain()) return x.domain() < y.domain();
    const auto& a = x.intervals();
    const auto& b = y.intervals();
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                        [](const Interval& p, const Interval& q) {
                                            return std::tie(p.start, p.end) < std::tie(q.start, q.end);
                                        });
}

// Content order, so results do not depend on how files are named or listed.
std::vector<IntervalPair> canonical_order(std::vector<IntervalPair> pairs) {
    std::stable_sort(pairs.begin(), pairs.end(), [](const IntervalPair& x, const IntervalPair& y) {
        if (interval_set_less(x.first, y.first)) return true;
        if (interval_set_less(y.first, x.first)) return false;
        return interval_set_less(x.second, y.second);
    });
    return pairs;
}

} // namespace

double observed_agreement(const IntervalSet& a, const IntervalSet& b) {
    if (!(a.domain() > 0.0)) return 1.0;
    return agreed_seconds(a, b) / a.domain();
}

std::string_view to_string(KappaStatus status) noexcept {
    switch (status) {
    case KappaStatus::Ok: return "ok";
    case KappaStatus::DegenerateChance: return "DegenerateChance";
    case KappaStatus::InsufficientFiles: return "InsufficientFiles";
    }
    return "ok";
}

std::string_view interpret_kappa(double kappa) noexcept {
    if (kappa <= 0.0) return "no agreement";
    if (kappa <= 0.20) return "slight";
    if (kappa <= 0.40) return "fair";
    if (kappa <= 0.60) return "moderate";
    if (kappa <= 0.80) return "substantial";
    return "almost perfect";
}

std::string KappaResult::interpretation() const {
    if (!kappa) return std::string(to_string(status));
    return std::string(interpret_kappa(*kappa));
}

AgreementMatrix agreement_matrix(const std::vector<IntervalPair>& pairs) {
    const std::size_t n = pairs.size();
    AgreementMatrix m(n, std::vector<AgreementCell>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double domain = std::min(pairs[i].first.domain(), pairs[j].second.domain());
            const IntervalSet a = pairs[i].first.truncated(domain);
            const IntervalSet b = pairs[j].second.truncated(domain);
            m[i][j] = {agreed_seconds(a, b), domain};
        }
    }
    return m;
}

std::vector<std::size_t> random_derangement(std::size_t n, Rng& rng) {
    std::vector<std::size_t> perm(n);
    if (n < 2) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        return perm;
    }
    for (;;) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t i = n - 1; i > 0; --i) {
            std::swap(perm[i], perm[rng.below(i + 1)]);
        }
        bool fixed_point = false;
        for (std::size_t i = 0; i < n && !fixed_point; ++i) fixed_point = perm[i] == i;
        if (!fixed_point) return perm;
    }
}

KappaResult pseudo_kappa(const std::vector<IntervalPair>& pairs, std::size_t n_permutations,
                         std::uint64_t seed) {
    for (const auto& [a, b] : pairs) {
        if (std::abs(a.domain() - b.domain()) > 1e-9) {
            throw Error(ErrorCode::DomainMismatch, "paired annotations have different durations");
        }
    }
    const auto ordered = canonical_order(pairs);
    const auto m = agreement_matrix(ordered);
    KappaResult r;
    r.seed = seed;
    r.n_permutations = n_permutations;
    std::vector<std::size_t> idx(ordered.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (ordered.size() < 2) {
        Rng unused(seed);
        r.p_o = kappa_parts(m, idx, 0, unused).p_o;
        r.status = KappaStatus::InsufficientFiles;
        return r;
    }
    Rng rng(derive_seed(seed, 0));
    const auto parts = kappa_parts(m, idx, n_permutations, rng);
    r.p_o = parts.p_o;
    r.p_e = parts.p_e;
    r.kappa = kappa_value(parts.p_o, parts.p_e, r.status);
    return r;
}

double percentile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

BootstrapInterval bootstrap_ci(const std::vector<IntervalPair>& pairs, std::size_t n_bootstrap,
                               std::size_t n_permutations, std::uint64_t seed, unsigned jobs, double alpha) {
    BootstrapInterval out;
    if (pairs.size() < 2 || n_bootstrap == 0) {
        return out;
    }
    const auto ordered = canonical_order(pairs);
    const auto m = agreement_matrix(ordered);
    const std::size_t n = ordered.size();
    std::vector<std::optional<double>> values(n_bootstrap);
    parallel_for(n_bootstrap, jobs, [&](std::size_t r) {
        Rng rng(derive_seed(seed, 1, r));
        std::vector<std::size_t> idx(n);
        for (auto& k : idx) k = static_cast<std::size_t>(rng.below(n));
        // One distinct file leaves no other file to pair with.
        if (std::all_of(idx.begin(), idx.end(), [&](std::size_t k) { return k == idx[0]; })) return;
        const auto parts = kappa_parts(m, idx, n_permutations, rng);
        KappaStatus status;
        values[r] = kappa_value(parts.p_o, parts.p_e, status);
    });
    for (const auto& v : values) {
        if (v) {
            out.replicates.push_back(*v);
        } else {
            ++out.n_degenerate;
        }
    }
    std::sort(out.replicates.begin(), out.replicates.end());
    if (!out.replicates.empty()) {
        out.low = percentile_sorted(out.replicates, alpha / 2.0);
        out.high = percentile_sorted(out.replicates, 1.0 - alpha / 2.0);
    }
    return out;
}

std::string_view display_name(Category category) noexcept {
    switch (category) {
    case Category::Inspiration: return "Inspiration";
    case Category::Expiration: return "Expiration";
    case Category::Both: return "Both phases";
    }
    return "";
}

std::optional<PhaseClass> category_class(Category category) noexcept {
    switch (category) {
    case Category::Inspiration: return PhaseClass::Inspiration;
    case Category::Expiration: return PhaseClass::Expiration;
    case Category::Both: return std::nullopt;
    }
    return std::nullopt;
}

AgreementReport evaluate_corpus(const std::vector<Annotation>& reference,
                                const std::vector<Annotation>& hypothesis, const MetricConfig& config,
                                std::string reference_label, std::string hypothesis_label) {
    std::map<std::string, const Annotation*> hyp_by_id;
    for (const auto& h : hypothesis) hyp_by_id[h.file_id] = &h;
    std::map<std::string, const Annotation*> ref_by_id;
    for (const auto& a : reference) ref_by_id[a.file_id] = &a;
    for (const auto& [id, _] : hyp_by_id) {
        if (!ref_by_id.contains(id)) {
            throw Error(ErrorCode::MissingFile, "file '" + id + "' has no " + reference_label + " annotation");
        }
    }

    AgreementReport report;
    report.reference_label = std::move(reference_label);
    report.hypothesis_label = std::move(hypothesis_label);
    report.conventional_roles = config.conventional_roles;

    std::vector<IntervalPair> pairs[kCategoryCount];
    double weighted_sens[kCategoryCount] = {}, weight_sens[kCategoryCount] = {};
    double weighted_spec[kCategoryCount] = {}, weight_spec[kCategoryCount] = {};

    for (const auto& [id, ref] : ref_by_id) {
        auto it = hyp_by_id.find(id);
        if (it == hyp_by_id.end()) {
            throw Error(ErrorCode::MissingFile, "file '" + id + "' has no " + report.hypothesis_label + " annotation");
        }
        const Annotation& hyp = *it->second;
        if (std::abs(ref->duration_s - hyp.duration_s) > 1e-6) {
            throw Error(ErrorCode::DomainMismatch, "file '" + id + "': durations " +
                                                       format_shortest(ref->duration_s) + " s and " +
                                                       format_shortest(hyp.duration_s) + " s differ");
        }
        const double domain = ref->duration_s;
        FileReport file;
        file.file_id = id;
        file.duration_s = domain;
        const auto m1 = match_boxes(ref->boxes, hyp.boxes);
        for (std::size_t c = 0; c < kCategoryCount; ++c) {
            const auto category = static_cast<Category>(c);
            const auto phase = category_class(category);
            file.boxes[c] = m1.for_class(phase);
            IntervalSet a = IntervalSet::from_boxes(ref->boxes, domain, phase);
            IntervalSet b = IntervalSet::from_boxes(hyp.boxes, domain, phase);
            file.confusion[c] = confusion(a, b, config.conventional_roles);
            file.rates[c] = screening_rates(file.confusion[c]);

            auto& cat = report.categories[c];
            cat.boxes += file.boxes[c];
            cat.confusion += file.confusion[c];
            if (file.rates[c].sensitivity) {
                weighted_sens[c] += domain * *file.rates[c].sensitivity;
                weight_sens[c] += domain;
            } else {
                ++cat.rates.n_sensitivity_undefined;
            }
            if (file.rates[c].specificity) {
                weighted_spec[c] += domain * *file.rates[c].specificity;
                weight_spec[c] += domain;
            } else {
                ++cat.rates.n_specificity_undefined;
            }
            pairs[c].emplace_back(std::move(a), std::move(b));
        }
        report.files.push_back(std::move(file));
    }

    for (std::size_t c = 0; c < kCategoryCount; ++c) {
        auto& cat = report.categories[c];
        if (weight_sens[c] > 0.0) cat.rates.sensitivity = weighted_sens[c] / weight_sens[c];
        if (weight_spec[c] > 0.0) cat.rates.specificity = weighted_spec[c] / weight_spec[c];

        const std::uint64_t category_seed = derive_seed(config.seed, 1000 + c);
        cat.kappa = pseudo_kappa(pairs[c], config.n_permutations, category_seed);
        cat.kappa.seed = config.seed;
        if (cat.kappa.status == KappaStatus::InsufficientFiles) continue;
        const auto ci = bootstrap_ci(pairs[c], config.n_bootstrap, config.n_permutations, category_seed,
                                     config.jobs);
        cat.kappa.n_bootstrap = config.n_bootstrap;
        cat.kappa.n_degenerate_replicates = ci.n_degenerate;
        cat.kappa.ci_low = ci.low;
        cat.kappa.ci_high = ci.high;
        if (cat.kappa.kappa && ci.low && ci.high) {
            cat.kappa.ci_excludes_estimate = *cat.kappa.kappa < *ci.low || *cat.kappa.kappa > *ci.high;
        }
    }
    return report;
}

} // namespace lungphase
