#include <doctest.h>

#include "lungphase/agreement.hpp"
#include "lungphase/errors.hpp"
#include "lungphase/random.hpp"
#include "lungphase/synth.hpp"
#include "oracles.hpp"

#include <cmath>
#include <set>

using namespace lungphase;

namespace {

PhaseBox I(double a, double b) { return {PhaseClass::Inspiration, a, b, 1.0}; }
PhaseBox E(double a, double b) { return {PhaseClass::Expiration, a, b, 1.0}; }

std::vector<std::pair<double, double>> raw(const IntervalSet& s) {
    std::vector<std::pair<double, double>> out;
    for (const auto& iv : s.intervals()) out.emplace_back(iv.start, iv.end);
    return out;
}

IntervalSet random_set(Rng& rng, double domain) {
    std::vector<Interval> iv;
    const int n = static_cast<int>(rng.below(6));
    for (int i = 0; i < n; ++i) {
        const double a = rng.uniform(0, domain);
        iv.push_back({a, std::min(domain, a + rng.uniform(0.01, domain / 3))});
    }
    return IntervalSet(iv, domain);
}

std::vector<Annotation> synthetic_truth(std::size_t n, std::uint64_t seed) {
    std::vector<Annotation> out;
    for (const auto& s : standard_corpus_specs(n, seed)) out.push_back(synth_file(s).second);
    return out;
}

} // namespace

TEST_CASE("jaccard") {
    CHECK(jaccard({0, 1}, {0, 1}) == 1.0);
    CHECK(jaccard({0, 1}, {2, 3}) == 0.0);
    CHECK(jaccard({0, 1}, {0.5, 1.5}) == doctest::Approx(1.0 / 3.0));
    CHECK(jaccard({1, 1}, {1, 1}) == 0.0);
}

TEST_CASE("match_boxes: identity, class mismatch, low overlap") {
    const std::vector<PhaseBox> a{I(0, 1), E(1, 2.5), I(3, 4)};
    const auto same = match_boxes(a, a);
    CHECK(same.both.matches == 3);
    CHECK(same.both.agreement() == 1.0);
    CHECK(same.inspiration.agreement() == 1.0);
    CHECK(same.unmatched_a.empty());

    const auto cls = match_boxes({I(0, 2)}, {E(0, 2)});
    CHECK(cls.both.matches == 0);
    CHECK(cls.both.agreement() == 0.0);

    CHECK(match_boxes({I(0, 2)}, {I(1, 3)}).both.matches == 0);

    const auto empty = match_boxes({}, {});
    CHECK(empty.both.agreement() == 1.0);
    CHECK(!empty.both.recall_a());
}

TEST_CASE("match_boxes is one-to-one, greedy by Jaccard, symmetric in agreement") {
    // Both B boxes exceed 0.5 with A[0]; only the better one may match it.
    const auto r = match_boxes({I(0, 2), I(2.1, 4)}, {I(0, 1.9), I(0.1, 2.2)});
    CHECK(r.both.matches == 1);
    REQUIRE(r.matches.size() == 1);
    CHECK(r.matches[0].b_index == 0);
    CHECK(r.both.agreement() == doctest::Approx(0.5));
    CHECK(r.unmatched_b == std::vector<std::size_t>{1});

    Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<PhaseBox> a, b;
        for (int i = 0; i < 5; ++i) {
            const double s = i * 2 + rng.uniform(0, 0.5);
            a.push_back({rng.below(2) ? PhaseClass::Inspiration : PhaseClass::Expiration, s, s + rng.uniform(0.5, 1.5)});
            const double t = i * 2 + rng.uniform(0, 0.5);
            b.push_back({rng.below(2) ? PhaseClass::Inspiration : PhaseClass::Expiration, t, t + rng.uniform(0.5, 1.5)});
        }
        CHECK(match_boxes(a, b).both.agreement() == match_boxes(b, a).both.agreement());
    }
}

TEST_CASE("confusion worked example and conventions") {
    const IntervalSet a({{0, 4}}, 10), b({{1, 5}}, 10);
    const auto m = confusion(a, b);
    CHECK(m.tp_s == doctest::Approx(3));
    CHECK(m.fp_s == doctest::Approx(1));
    CHECK(m.fn_s == doctest::Approx(1));
    CHECK(m.tn_s == doctest::Approx(5));
    const auto r = screening_rates(m);
    CHECK(*r.sensitivity == doctest::Approx(0.75));
    CHECK(*r.specificity == doctest::Approx(5.0 / 6.0));

    // Asymmetric case separates the two role conventions.
    const IntervalSet c({{0, 4}}, 10), d({{0, 6}}, 10);
    CHECK(confusion(c, d).fp_s == doctest::Approx(0));
    CHECK(confusion(c, d).fn_s == doctest::Approx(2));
    CHECK(confusion(c, d, true).fp_s == doctest::Approx(2));
    CHECK(confusion(c, d, true).fn_s == doctest::Approx(0));

    const auto full = confusion(IntervalSet(10), IntervalSet({{0, 10}}, 10));
    CHECK(full.tp_s == 0);
    CHECK(full.fp_s == 0);
    CHECK(full.fn_s == doctest::Approx(10));
    CHECK(full.tn_s == 0);

    const auto none = screening_rates(confusion(IntervalSet(10), IntervalSet(10)));
    CHECK(!none.sensitivity);
    CHECK(*none.specificity == 1.0);
}

TEST_CASE("confusion matches the 1 ms grid, sums to T, and is symmetric") {
    Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const double domain = rng.uniform(1, 15);
        const auto a = random_set(rng, domain);
        const auto b = random_set(rng, domain);
        const auto m = confusion(a, b);
        const auto g = oracle::grid_confusion(raw(a), raw(b), domain, 1e-3);
        const double tol = 2e-3 * static_cast<double>(2 * (a.intervals().size() + b.intervals().size()));
        CHECK(std::abs(m.tp_s - g.tp) <= tol + 1e-9);
        CHECK(std::abs(m.fp_s - g.fp) <= tol + 1e-9);
        CHECK(std::abs(m.tn_s - g.tn) <= tol + 1e-9);
        CHECK(std::abs(m.fn_s - g.fn) <= tol + 1e-9);
        CHECK(std::abs(m.total() - domain) < 1e-9);
        const auto swapped = confusion(b, a);
        CHECK(swapped.tp_s == doctest::Approx(m.tp_s));
        CHECK(swapped.tn_s == doctest::Approx(m.tn_s));
        CHECK(swapped.fp_s == doctest::Approx(m.fn_s));
        CHECK(swapped.fn_s == doctest::Approx(m.fp_s));
    }
}

TEST_CASE("derangements have no fixed points and are reproducible") {
    Rng a(5), b(5);
    for (int i = 0; i < 200; ++i) {
        const auto p = random_derangement(7, a);
        CHECK(p == random_derangement(7, b));
        std::set<std::size_t> seen(p.begin(), p.end());
        CHECK(seen.size() == 7);
        for (std::size_t k = 0; k < p.size(); ++k) CHECK(p[k] != k);
    }
}

TEST_CASE("kappa bands") {
    CHECK(interpret_kappa(0.0) == "no agreement");
    CHECK(interpret_kappa(0.2) == "slight");
    CHECK(interpret_kappa(0.21) == "fair");
    CHECK(interpret_kappa(0.6) == "moderate");
    CHECK(interpret_kappa(0.61) == "substantial");
    CHECK(interpret_kappa(0.81) == "almost perfect");
}

TEST_CASE("pseudo-kappa: identity, determinism, relabelling, degenerate cases") {
    const auto truth = synthetic_truth(6, 3);
    std::vector<IntervalPair> same;
    for (const auto& t : truth) {
        const auto s = IntervalSet::from_boxes(t.boxes, t.duration_s, PhaseClass::Inspiration);
        same.emplace_back(s, s);
    }
    const auto k = pseudo_kappa(same, 100, 1);
    CHECK(k.status == KappaStatus::Ok);
    CHECK(*k.kappa == 1.0);
    CHECK(k.p_o == 1.0);
    CHECK(k.p_e < 1.0);

    std::vector<IntervalPair> shifted;
    for (const auto& [a, b] : same) {
        std::vector<Interval> moved;
        for (const auto& iv : b.intervals()) moved.push_back({iv.start + 0.2, iv.end + 0.2});
        shifted.emplace_back(a, IntervalSet(moved, b.domain()));
    }
    const auto k1 = pseudo_kappa(shifted, 100, 9);
    const auto k2 = pseudo_kappa(shifted, 100, 9);
    CHECK(*k1.kappa == *k2.kappa);
    CHECK(k1.p_e == k2.p_e);
    auto reversed = shifted;
    std::reverse(reversed.begin(), reversed.end());
    CHECK(*pseudo_kappa(reversed, 100, 9).kappa == *k1.kappa);

    CHECK(pseudo_kappa({same[0]}, 100, 1).status == KappaStatus::InsufficientFiles);
    CHECK(!pseudo_kappa({same[0]}, 100, 1).kappa);

    // Every file all background on one side and all breathing on the other:
    // observed and chance agreement are both 0, kappa 0.
    std::vector<IntervalPair> opposite{{IntervalSet(5), IntervalSet({{0, 5}}, 5)},
                                       {IntervalSet(5), IntervalSet({{0, 5}}, 5)}};
    CHECK(*pseudo_kappa(opposite, 10, 1).kappa == 0.0);

    // Chance agreement 1 with imperfect observed agreement cannot happen, so
    // a degenerate chance term only arises for identical constant sets, where
    // p_o = 1 wins.
    std::vector<IntervalPair> blank{{IntervalSet(5), IntervalSet(5)}, {IntervalSet(5), IntervalSet(5)}};
    CHECK(*pseudo_kappa(blank, 10, 1).kappa == 1.0);
}

TEST_CASE("bootstrap: identity CI, single replicate, determinism across jobs") {
    const auto truth = synthetic_truth(6, 4);
    std::vector<IntervalPair> same, noisy;
    for (const auto& t : truth) {
        const auto s = IntervalSet::from_boxes(t.boxes, t.duration_s);
        same.emplace_back(s, s);
        std::vector<Interval> moved;
        for (const auto& iv : s.intervals()) moved.push_back({iv.start + 0.1, iv.end - 0.05});
        noisy.emplace_back(s, IntervalSet(moved, s.domain()));
    }
    const auto ci = bootstrap_ci(same, 200, 20, 3);
    CHECK(*ci.low == 1.0);
    CHECK(*ci.high == 1.0);

    const auto one = bootstrap_ci(noisy, 1, 20, 3);
    CHECK(*one.low == *one.high);
    CHECK(one.replicates.size() == 1);

    const auto serial = bootstrap_ci(noisy, 100, 20, 8, 1);
    const auto threaded = bootstrap_ci(noisy, 100, 20, 8, 4);
    CHECK(serial.replicates == threaded.replicates);
    CHECK(*serial.low <= *serial.high);
}

TEST_CASE("bootstrap: repeated files are never paired with their own copy") {
    // With two files every replicate is either both files (the full estimate)
    // or one file twice (no chance pairing left).
    const auto truth = synthetic_truth(2, 5);
    std::vector<IntervalPair> noisy;
    for (const auto& t : truth) {
        const auto s = IntervalSet::from_boxes(t.boxes, t.duration_s);
        std::vector<Interval> moved;
        for (const auto& iv : s.intervals()) moved.push_back({iv.start + 0.1, iv.end - 0.05});
        noisy.emplace_back(s, IntervalSet(moved, s.domain()));
    }
    const double full = *pseudo_kappa(noisy, 20, 9).kappa;
    const auto ci = bootstrap_ci(noisy, 200, 20, 9);
    CHECK(ci.n_degenerate > 0);
    CHECK(ci.n_degenerate + ci.replicates.size() == 200);
    for (double k : ci.replicates) CHECK(k == doctest::Approx(full).epsilon(1e-12));
}

TEST_CASE("percentiles interpolate between order statistics") {
    const std::vector<double> v{1, 2, 3, 4, 5};
    CHECK(percentile_sorted(v, 0.0) == 1.0);
    CHECK(percentile_sorted(v, 1.0) == 5.0);
    CHECK(percentile_sorted(v, 0.5) == 3.0);
    CHECK(percentile_sorted(v, 0.025) == doctest::Approx(1.1));
    CHECK(percentile_sorted({7}, 0.975) == 7.0);
}

TEST_CASE("evaluate_corpus: identity and structure") {
    const auto truth = synthetic_truth(5, 6);
    MetricConfig cfg;
    cfg.n_bootstrap = 50;
    cfg.n_permutations = 20;
    const auto r = evaluate_corpus(truth, truth, cfg, "Annotator 1", "Annotator 1 copy");
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
        const auto& cat = r.categories[c];
        CHECK(cat.boxes.agreement() == 1.0);
        CHECK(*cat.rates.sensitivity == 1.0);
        CHECK(*cat.rates.specificity == 1.0);
        CHECK(*cat.kappa.kappa == 1.0);
        CHECK(*cat.kappa.ci_low == 1.0);
    }
    CHECK(r.files.size() == 5);
    CHECK(r.category(Category::Both).boxes.n_a == 30);

    ConfusionMeasure sum;
    for (const auto& f : r.files) sum += f.confusion[2];
    CHECK(sum.tp_s == doctest::Approx(r.category(Category::Both).confusion.tp_s));
}

TEST_CASE("evaluate_corpus errors and the single-file case") {
    auto truth = synthetic_truth(2, 7);
    MetricConfig cfg;
    cfg.n_bootstrap = 10;
    auto missing = truth;
    missing.pop_back();
    CHECK_THROWS_AS(evaluate_corpus(truth, missing, cfg), Error);
    auto longer = truth;
    longer[0].duration_s += 1;
    try {
        evaluate_corpus(truth, longer, cfg);
        FAIL("expected DomainMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DomainMismatch);
    }
    truth.pop_back();
    const auto r = evaluate_corpus(truth, truth, cfg);
    CHECK(r.category(Category::Both).boxes.agreement() == 1.0);
    CHECK(r.category(Category::Both).kappa.status == KappaStatus::InsufficientFiles);
    CHECK(!r.category(Category::Both).kappa.kappa);
}
