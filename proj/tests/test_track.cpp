#include "pathtune/track.hpp"

#include "pathtune/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

using namespace pathtune;

namespace {

TrackSpec stadium(double straight = 20.0, double radius = 10.0,
                  TrackDirection dir = TrackDirection::counterclockwise) {
    TrackSpec spec;
    spec.straight_length = straight;
    spec.corner_radius = radius;
    spec.direction = dir;
    return spec;
}

// Distance from a point to the stadium centerline, written independently of
// the production projection: the centerline is at corner_radius from the
// segment joining the two arc centers.
double centerline_residual(const TrackSpec& spec, double x, double y) {
    const double mirror = spec.direction == TrackDirection::clockwise ? -1.0 : 1.0;
    const double py = mirror * y;
    const double qx = std::clamp(x, 0.0, spec.straight_length);
    const double dist = std::hypot(x - qx, py - spec.corner_radius);
    return std::abs(dist - spec.corner_radius);
}

} // namespace

TEST_CASE("lap_length closed forms") {
    CHECK(lap_length(stadium(20, 10)) == doctest::Approx(102.83185307179586).epsilon(1e-12));
    CHECK(lap_length(stadium(0, 3)) == doctest::Approx(2.0 * kPi * 3.0).epsilon(1e-12));
    CHECK(lap_length(stadium(20, 10, TrackDirection::clockwise)) ==
          doctest::Approx(lap_length(stadium(20, 10))).epsilon(1e-15));
}

TEST_CASE("TrackSpec validation") {
    CHECK_THROWS_AS(stadium(-1, 10).validate(), std::invalid_argument);
    CHECK_THROWS_AS(stadium(10, 0).validate(), std::invalid_argument);
    CHECK_NOTHROW(stadium(0, 1).validate());
}

TEST_CASE("target_at anchors") {
    const TrackSpec spec = stadium(20, 10);

    SUBCASE("start of the first straight") {
        const TargetState t = target_at(spec, 0.0, 2.0);
        CHECK(t.s == doctest::Approx(0.0));
        CHECK(t.x == doctest::Approx(0.0));
        CHECK(t.y == doctest::Approx(0.0));
        CHECK(t.phi == doctest::Approx(0.0));
        CHECK(t.phi_dot == doctest::Approx(0.0));
        CHECK(t.v == doctest::Approx(2.0));
    }
    SUBCASE("straight/arc junction") {
        const TargetState t = target_at(spec, 10.0, 2.0); // s = 20, first arc begins
        CHECK(t.s == doctest::Approx(20.0));
        CHECK(t.x == doctest::Approx(20.0));
        CHECK(t.y == doctest::Approx(0.0));
        CHECK(std::abs(t.phi_dot) == doctest::Approx(0.2)); // v_t / radius
        // one sample earlier the heading rate is still zero
        CHECK(target_at(spec, 10.0 - 1e-6, 2.0).phi_dot == doctest::Approx(0.0));
    }
    SUBCASE("wrap-around reproduces the start") {
        const double lap_t = lap_length(spec) / 2.0;
        const TargetState a = target_at(spec, 0.0, 2.0);
        const TargetState b = target_at(spec, lap_t, 2.0);
        CHECK(b.x == doctest::Approx(a.x).epsilon(1e-9));
        CHECK(b.y == doctest::Approx(a.y).epsilon(1e-9));
        CHECK(b.phi == doctest::Approx(a.phi).epsilon(1e-9));
    }
}

TEST_CASE("target_at rejects bad arguments") {
    const TrackSpec spec = stadium();
    CHECK_THROWS_AS(target_at(spec, -1.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(target_at(spec, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(target_at(spec, 1.0, -2.0), std::invalid_argument);
    CHECK_THROWS_AS(target_at(spec, std::nan(""), 2.0), std::invalid_argument);
}

TEST_CASE("target stays on the centerline for both directions") {
    for (TrackDirection dir : {TrackDirection::counterclockwise, TrackDirection::clockwise}) {
        const TrackSpec spec = stadium(20, 10, dir);
        const double lap = lap_length(spec);
        for (int i = 0; i <= 2000; ++i) {
            const double s = lap * static_cast<double>(i) / 2000.0 * 1.37; // beyond one lap too
            const TargetState t = target_at_arclength(spec, s, 2.0);
            CHECK(centerline_residual(spec, t.x, t.y) < 1e-9);
            CHECK(t.phi > -kPi);
            CHECK(t.phi <= kPi);
        }
    }
}

TEST_CASE("numerical derivatives of the target match its velocity fields") {
    const TrackSpec spec = stadium(20, 10);
    const double v_t = 2.0;
    const double dt = 1e-7;
    const double lap = lap_length(spec);
    Rng rng(3);
    int checked = 0;
    while (checked < 300) {
        const double t = rng.uniform(0.0, lap / v_t);
        const double s = v_t * t;
        // keep clear of the four junctions where phi_dot jumps
        const double margin = 1e-3;
        const double ls = spec.straight_length, arc = kPi * spec.corner_radius;
        const double rel[] = {0.0, ls, ls + arc, 2 * ls + arc};
        bool near_junction = false;
        for (double boundary : rel) {
            if (std::abs(std::remainder(s - boundary, lap)) < margin) near_junction = true;
        }
        if (near_junction) continue;
        ++checked;

        const TargetState a = target_at(spec, t, v_t);
        const TargetState b = target_at(spec, t + dt, v_t);
        CHECK((b.x - a.x) / dt == doctest::Approx(v_t * std::cos(a.phi)).epsilon(1e-4));
        CHECK((b.y - a.y) / dt == doctest::Approx(v_t * std::sin(a.phi)).epsilon(1e-4));
        CHECK(wrap_angle(b.phi - a.phi) / dt == doctest::Approx(a.phi_dot).epsilon(1e-4));
    }
}

TEST_CASE("clockwise track mirrors the counterclockwise one") {
    const TrackSpec ccw = stadium(15, 5, TrackDirection::counterclockwise);
    const TrackSpec cw = stadium(15, 5, TrackDirection::clockwise);
    for (double s : {0.0, 3.0, 16.0, 20.0, 40.0, 55.0}) {
        const TargetState a = target_at_arclength(ccw, s, 2.0);
        const TargetState b = target_at_arclength(cw, s, 2.0);
        CHECK(b.x == doctest::Approx(a.x).epsilon(1e-12));
        CHECK(b.y == doctest::Approx(-a.y).epsilon(1e-12));
        CHECK(b.phi_dot == doctest::Approx(-a.phi_dot).epsilon(1e-12));
    }
}
