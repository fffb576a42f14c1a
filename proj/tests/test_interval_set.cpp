#include <doctest.h>

#include "lungphase/errors.hpp"
#include "lungphase/interval_set.hpp"

using namespace lungphase;

TEST_CASE("construction clips, sorts and merges") {
    IntervalSet s({{5, 6}, {-1, 1}, {0.5, 2}, {2, 3}, {9, 12}, {4, 4}}, 10);
    CHECK(s.intervals() == std::vector<Interval>{{0, 3}, {5, 6}, {9, 10}});
    CHECK(s.measure() == doctest::Approx(5.0));
    CHECK(s.contains(0.0));
    CHECK(!s.contains(3.0));
    CHECK(s.contains(9.5));
}

TEST_CASE("complement, intersection, union and difference") {
    const IntervalSet a({{0, 4}}, 10);
    const IntervalSet b({{1, 5}}, 10);
    CHECK(a.complement().intervals() == std::vector<Interval>{{4, 10}});
    CHECK(a.intersect(b).intervals() == std::vector<Interval>{{1, 4}});
    CHECK(a.unite(b).intervals() == std::vector<Interval>{{0, 5}});
    CHECK(a.subtract(b).intervals() == std::vector<Interval>{{0, 1}});
    CHECK(b.subtract(a).intervals() == std::vector<Interval>{{4, 5}});
    CHECK(IntervalSet(10).complement().measure() == 10.0);
    CHECK(a.truncated(2).intervals() == std::vector<Interval>{{0, 2}});
    CHECK(a.truncated(2).domain() == 2.0);
}

TEST_CASE("mismatched domains are an error") {
    try {
        IntervalSet(10).intersect(IntervalSet(11));
        FAIL("expected DomainMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DomainMismatch);
    }
}

TEST_CASE("from_boxes filters by class") {
    const std::vector<PhaseBox> boxes{{PhaseClass::Inspiration, 0, 1}, {PhaseClass::Expiration, 1, 2},
                                      {PhaseClass::Inspiration, 3, 4}};
    CHECK(IntervalSet::from_boxes(boxes, 5, PhaseClass::Inspiration).measure() == 2.0);
    CHECK(IntervalSet::from_boxes(boxes, 5).intervals() == std::vector<Interval>{{0, 2}, {3, 4}});
}
