#pragma once

#include "pathtune/geometry.hpp"

namespace pathtune {

enum class TrackDirection { counterclockwise, clockwise };

/// Stadium track: two parallel straights joined by two semicircles.
/// The counterclockwise lap starts at the beginning of the lower straight,
/// heading +x; the clockwise variant is the mirror image across the x-axis.
struct TrackSpec {
    double straight_length = 270.0; // m, >= 0
    double corner_radius = 5.0;     // m, > 0
    TrackDirection direction = TrackDirection::counterclockwise;

    /// Throws std::invalid_argument if the geometry is ill-formed.
    void validate() const;
};

/// Full lap length: 2 * straight + 2 * pi * radius.
double lap_length(const TrackSpec& spec);

/// Moving reference point: pose, speed and heading rate, plus its arc-length
/// position along the lap (wrapped to [0, lap_length)).
struct TargetState {
    double x = 0.0;       // m
    double y = 0.0;       // m
    double phi = 0.0;     // rad, in (-pi, pi]
    double v = 0.0;       // m/s, constant over a lap
    double phi_dot = 0.0; // rad/s; 0 on straights, +-v/radius on arcs
    double s = 0.0;       // m along the centerline
};

/// Target at arc length s (any s; wrapped modulo the lap length).
TargetState target_at_arclength(const TrackSpec& spec, double s, double v_t);

/// Target after t seconds of travel at speed v_t from the lap start.
/// Throws on non-finite t, t < 0 or v_t <= 0.
TargetState target_at(const TrackSpec& spec, double t, double v_t);

} // namespace pathtune
