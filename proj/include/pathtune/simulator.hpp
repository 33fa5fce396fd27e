#pragma once

#include "pathtune/controller.hpp"
#include "pathtune/track.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

namespace pathtune {

struct InitialOffset {
    double lateral = 0.5; // m, positive = left of the path direction
    double heading = 0.2; // rad, added to the path tangent
};

struct SimConfig {
    double dt_control = 0.01; // s, control period
    double dt_log = 0.1;      // s, logging period; integer multiple of dt_control
    double v_t = 2.0;         // m/s, target speed

    // White actuator noise, one std-dev per channel, drawn each control step.
    double noise_du_v = 0.05;     // m/s
    double noise_du_omega = 0.02; // rad/s
    // White measurement noise on the pose the controller (and the performance
    // log) sees.
    double noise_dy_x = 0.02;   // m
    double noise_dy_y = 0.02;   // m
    double noise_dy_phi = 0.01; // rad

    double divergence_rho = 16.0;  // m, target lost
    double divergence_e_lat = 3.0; // m, left the course
    std::uint64_t seed = 1;
    InitialOffset initial_offset{};

    /// Arc-length head start of the target so that rho(0) > 0.
    double target_lookahead = 14.0; // m

    /// Recording (and therefore cost accumulation) starts this many seconds
    /// into the lap, once the alignment transient has died out. Simulation,
    /// divergence detection and completion always cover the whole lap.
    double cost_warmup_s = 60.0;

    ControlLimits limits{};

    /// Throws std::invalid_argument listing every violated constraint.
    void validate() const;
};

struct LapSample {
    double t = 0.0;
    RobotPose robot;     // measured pose (what the controller and the
                         // performance index see)
    TargetState target;
    TrackingError err;   // from the measured pose
    ControlCommand cmd;  // controller output (before actuator noise)
    double e_lat = 0.0;  // m, signed distance to the centerline (left positive)
    double e_head = 0.0; // rad, heading misalignment with the path tangent
};

struct LapLog {
    std::vector<LapSample> samples; // strictly increasing t, spaced dt
    double dt = 0.1;                // sampling interval

    std::size_t last_index() const { return samples.empty() ? 0 : samples.size() - 1; }
};

struct LapResult {
    LapLog log;
    bool completed = false;
    double completed_length = 0.0; // m, target arc progress at termination
    double lap_len = 0.0;          // m
    std::optional<double> diverged_at; // s
};

/// One closed-loop lap: RK4 integration of the unicycle under the controller,
/// measurement/actuator noise injection, divergence detection (distance to
/// the target or lateral excursion, both on the true state). Deterministic
/// for a given config (including seed).
LapResult run_lap(const TrackSpec& track, const GainVector& gains, const SimConfig& cfg);

/// Signed lateral offset from the track centerline (positive = left of the
/// direction of travel) and heading misalignment with the local tangent.
/// Closed form for the stadium geometry.
std::pair<double, double> lateral_heading_errors(const RobotPose& robot,
                                                 const TrackSpec& track);

/// One RK4 step of x' = v cos phi, y' = v sin phi, phi' = omega with the
/// commands held constant over the step. Heading is wrapped afterwards.
RobotPose rk4_unicycle_step(const RobotPose& state, double v, double omega, double dt);

/// CSV export with the fixed column set:
/// t,x,y,phi,x_t,y_t,phi_t,v_cmd,omega_cmd,rho,alpha,beta,e_lat,e_head
void write_lap_csv(std::ostream& out, const LapLog& log);

} // namespace pathtune
