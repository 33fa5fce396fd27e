#include "pathtune/track.hpp"

#include <cmath>
#include <stdexcept>

namespace pathtune {

void TrackSpec::validate() const {
    if (!(straight_length >= 0.0) || !std::isfinite(straight_length)) {
        throw std::invalid_argument("TrackSpec: straight_length must be >= 0");
    }
    if (!(corner_radius > 0.0) || !std::isfinite(corner_radius)) {
        throw std::invalid_argument("TrackSpec: corner_radius must be > 0");
    }
}

double lap_length(const TrackSpec& spec) {
    return 2.0 * spec.straight_length + 2.0 * kPi * spec.corner_radius;
}

TargetState target_at_arclength(const TrackSpec& spec, double s, double v_t) {
    const double total = lap_length(spec);
    double u = std::fmod(s, total);
    if (u < 0.0) {
        u += total;
    }

    const double ls = spec.straight_length;
    const double r = spec.corner_radius;
    const double arc = kPi * r;

    // Counterclockwise parametrization; segments are half-open so the first
    // point of each arc already carries the arc's heading rate.
    double x, y, phi, phi_dot;
    if (u < ls) {
        x = u;
        y = 0.0;
        phi = 0.0;
        phi_dot = 0.0;
    } else if (u < ls + arc) {
        const double a = (u - ls) / r;
        x = ls + r * std::sin(a);
        y = r - r * std::cos(a);
        phi = a;
        phi_dot = v_t / r;
    } else if (u < 2.0 * ls + arc) {
        const double d = u - ls - arc;
        x = ls - d;
        y = 2.0 * r;
        phi = kPi;
        phi_dot = 0.0;
    } else {
        const double a = (u - 2.0 * ls - arc) / r;
        x = -r * std::sin(a);
        y = r + r * std::cos(a);
        phi = kPi + a;
        phi_dot = v_t / r;
    }

    if (spec.direction == TrackDirection::clockwise) {
        y = -y;
        phi = -phi;
        phi_dot = -phi_dot;
    }

    TargetState target;
    target.x = x;
    target.y = y;
    target.phi = wrap_angle(phi);
    target.v = v_t;
    target.phi_dot = phi_dot;
    target.s = u;
    return target;
}

TargetState target_at(const TrackSpec& spec, double t, double v_t) {
    if (!std::isfinite(t) || t < 0.0) {
        throw std::invalid_argument("target_at: t must be finite and >= 0");
    }
    if (!std::isfinite(v_t) || v_t <= 0.0) {
        throw std::invalid_argument("target_at: v_t must be finite and > 0");
    }
    return target_at_arclength(spec, v_t * t, v_t);
}

} // namespace pathtune
