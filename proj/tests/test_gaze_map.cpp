#include "eyero/errors.hpp"
#include "eyero/gaze_map.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <set>

using namespace eyero;

namespace {
GazeSample at(double x, double y) { return GazeSample{0, x, y, true}; }
} // namespace

TEST_CASE("quadrant examples") {
    CHECK(classify_quadrant(at(0.2, 0.3)) == Quadrant::UpperLeft);
    CHECK(classify_quadrant(at(0.7, 0.2)) == Quadrant::UpperRight);
    CHECK(classify_quadrant(at(0.5, 0.5)) == Quadrant::LowerRight);
    CHECK(classify_quadrant(at(0.1, 0.9)) == Quadrant::LowerLeft);
}

TEST_CASE("half-open boundaries put 0.5 on the right and lower side") {
    CHECK(classify_quadrant(at(0.5, 0.0)) == Quadrant::UpperRight);
    CHECK(classify_quadrant(at(0.0, 0.5)) == Quadrant::LowerLeft);
    const double below = std::nextafter(0.5, 0.0);
    CHECK(classify_quadrant(at(below, below)) == Quadrant::UpperLeft);
    CHECK(classify_quadrant(at(0.0, 0.0)) == Quadrant::UpperLeft);
    CHECK(classify_quadrant(at(1.0, 1.0)) == Quadrant::LowerRight);
    CHECK(classify_quadrant(at(1.0, 0.0)) == Quadrant::UpperRight);
    CHECK(classify_quadrant(at(0.0, 1.0)) == Quadrant::LowerLeft);
}

TEST_CASE("invalid and out-of-range samples are rejected") {
    CHECK_THROWS_AS(classify_quadrant(GazeSample{0, 0.3, 0.3, false}), ClassificationError);
    CHECK_THROWS_AS(classify_quadrant(at(-0.01, 0.3)), ClassificationError);
    CHECK_THROWS_AS(classify_quadrant(at(0.3, 1.0001)), ClassificationError);
    CHECK_THROWS_AS(classify_quadrant(at(std::nan(""), 0.3)), ClassificationError);
    CHECK_THROWS_AS(classify_quadrant(at(0.3, std::numeric_limits<double>::infinity())),
                    ClassificationError);
}

TEST_CASE("quadrant to body site mapping is a bijection") {
    CHECK(quadrant_to_body_site(Quadrant::UpperLeft) == BodySite::LeftWrist);
    CHECK(quadrant_to_body_site(Quadrant::UpperRight) == BodySite::RightWrist);
    CHECK(quadrant_to_body_site(Quadrant::LowerLeft) == BodySite::LeftAnkle);
    CHECK(quadrant_to_body_site(Quadrant::LowerRight) == BodySite::RightAnkle);
    std::set<BodySite> image;
    for (Quadrant q : kAllQuadrants) image.insert(quadrant_to_body_site(q));
    CHECK(image.size() == 4);
}

TEST_CASE("distance from center") {
    CHECK(distance_from_center(at(0.5, 0.5)) == 0.0);
    CHECK(distance_from_center(at(1.0, 1.0)) == doctest::Approx(0.70710678).epsilon(1e-8));
    CHECK(distance_from_center(at(0.5, 0.0)) == 0.5);
}

TEST_CASE("partition is total and exclusive on random points") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20000; ++i) {
        const double x = u(rng);
        const double y = u(rng);
        const Quadrant q = classify_quadrant(at(x, y));
        const bool left = x < 0.5;
        const bool upper = y < 0.5;
        const Quadrant expected = upper ? (left ? Quadrant::UpperLeft : Quadrant::UpperRight)
                                        : (left ? Quadrant::LowerLeft : Quadrant::LowerRight);
        REQUIRE(q == expected);
    }
}

TEST_CASE("site names round-trip") {
    for (BodySite s : kAllBodySites) CHECK(body_site_from_string(to_string(s)) == s);
    CHECK(to_string(BodySite::LeftWrist) == "LeftWrist");
    CHECK_THROWS(body_site_from_string("LeftKnee"));
}
