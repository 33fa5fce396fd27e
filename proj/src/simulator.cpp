#include "pathtune/simulator.hpp"

#include "pathtune/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pathtune {

void SimConfig::validate() const {
    std::string problems;
    auto complain = [&problems](const char* msg) {
        if (!problems.empty()) problems += "; ";
        problems += msg;
    };

    if (!(dt_control > 0.0) || !std::isfinite(dt_control)) {
        complain("dt_control must be > 0");
    } else {
        const double steps = dt_log / dt_control;
        if (!(dt_log > 0.0) || std::abs(steps - std::round(steps)) > 1e-9 ||
            std::round(steps) < 1.0) {
            complain("dt_log must be a positive integer multiple of dt_control");
        }
    }
    if (!(v_t > 0.0) || !std::isfinite(v_t)) complain("v_t must be > 0");
    if (noise_du_v < 0.0 || noise_du_omega < 0.0 || noise_dy_x < 0.0 ||
        noise_dy_y < 0.0 || noise_dy_phi < 0.0) {
        complain("noise std-devs must be >= 0");
    }
    if (!(divergence_rho > 0.0)) complain("divergence_rho must be > 0");
    if (!(divergence_e_lat > 0.0)) complain("divergence_e_lat must be > 0");
    if (target_lookahead < 0.0) complain("target_lookahead must be >= 0");
    if (cost_warmup_s < 0.0) complain("cost_warmup_s must be >= 0");
    if (!(limits.v_max > 0.0) || !(limits.omega_max > 0.0)) {
        complain("actuator limits must be > 0");
    }
    if (!problems.empty()) {
        throw std::invalid_argument("SimConfig: " + problems);
    }
}

RobotPose rk4_unicycle_step(const RobotPose& state, double v, double omega, double dt) {
    auto deriv = [v, omega](const RobotPose& p) {
        return RobotPose{v * std::cos(p.phi), v * std::sin(p.phi), omega};
    };
    auto advance = [](const RobotPose& p, const RobotPose& d, double h) {
        return RobotPose{p.x + h * d.x, p.y + h * d.y, p.phi + h * d.phi};
    };

    const RobotPose k1 = deriv(state);
    const RobotPose k2 = deriv(advance(state, k1, 0.5 * dt));
    const RobotPose k3 = deriv(advance(state, k2, 0.5 * dt));
    const RobotPose k4 = deriv(advance(state, k3, dt));

    RobotPose next;
    next.x = state.x + dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    next.y = state.y + dt / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
    next.phi = wrap_angle(state.phi + dt / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi));
    return next;
}

namespace {

struct StadiumProjection {
    double e_lat = 0.0;
    double tangent = 0.0;
};

// Distance geometry of the stadium: the centerline is the set of points at
// corner_radius from the spine segment joining the two arc centers. Projecting
// onto the spine gives the nearest centerline point, its tangent, and the
// signed lateral offset in closed form.
StadiumProjection project_onto_stadium(double x, double y, const TrackSpec& spec) {
    const double mirror = spec.direction == TrackDirection::clockwise ? -1.0 : 1.0;
    const double py = mirror * y;
    const double r = spec.corner_radius;

    const double qx = std::clamp(x, 0.0, spec.straight_length);
    const double dx = x - qx;
    const double dy = py - r;
    const double dist = std::hypot(dx, dy);

    StadiumProjection proj;
    double tangent_ccw;
    if (dist < 1e-12) {
        // On the spine itself: nearest centerline point is ambiguous; pick the
        // one straight below (lower straight).
        proj.e_lat = r;
        tangent_ccw = 0.0;
    } else {
        proj.e_lat = r - dist; // inside the stadium = left of travel (ccw)
        tangent_ccw = std::atan2(dy, dx) + 0.5 * kPi;
    }
    if (spec.direction == TrackDirection::clockwise) {
        proj.e_lat = -proj.e_lat;
        tangent_ccw = -tangent_ccw;
    }
    proj.tangent = wrap_angle(tangent_ccw);
    return proj;
}

} // namespace

std::pair<double, double> lateral_heading_errors(const RobotPose& robot,
                                                 const TrackSpec& track) {
    const StadiumProjection proj = project_onto_stadium(robot.x, robot.y, track);
    return {proj.e_lat, wrap_angle(robot.phi - proj.tangent)};
}

LapResult run_lap(const TrackSpec& track, const GainVector& gains, const SimConfig& cfg) {
    track.validate();
    gains.validate();
    cfg.validate();

    const double lap_len = lap_length(track);
    const double dt = cfg.dt_control;
    const int log_every = static_cast<int>(std::round(cfg.dt_log / dt));
    const double timeout = 2.0 * lap_len / cfg.v_t;
    const long max_steps = static_cast<long>(std::ceil(timeout / dt)) + 1;

    Rng rng(cfg.seed);

    // Start pose: centerline at s = 0, shifted by the configured lateral and
    // heading offsets (lateral positive = left of the path direction).
    const TargetState start_ref = target_at_arclength(track, 0.0, cfg.v_t);
    const double left = start_ref.phi + 0.5 * kPi;
    RobotPose state;
    state.x = start_ref.x + cfg.initial_offset.lateral * std::cos(left);
    state.y = start_ref.y + cfg.initial_offset.lateral * std::sin(left);
    state.phi = wrap_angle(start_ref.phi + cfg.initial_offset.heading);

    LapResult result;
    result.lap_len = lap_len;
    result.log.dt = cfg.dt_log;
    result.log.samples.reserve(static_cast<std::size_t>(lap_len / cfg.v_t / cfg.dt_log) + 2);

    for (long step = 0; step < max_steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        const double progress = cfg.v_t * t;

        if (progress >= lap_len) {
            result.completed = true;
            result.completed_length = lap_len;
            return result;
        }

        const TargetState target =
            target_at_arclength(track, cfg.target_lookahead + progress, cfg.v_t);
        const TrackingError err_true = compute_error(state, target);
        const auto [e_lat_true, e_head_true] = lateral_heading_errors(state, track);
        (void)e_head_true;

        if (err_true.rho > cfg.divergence_rho ||
            std::abs(e_lat_true) > cfg.divergence_e_lat) {
            result.completed = false;
            result.completed_length = std::min(progress, lap_len);
            result.diverged_at = t;
            return result;
        }

        // The controller and the performance log both see the measured pose;
        // always draw the full noise block so the stream layout is
        // independent of which channels are on.
        RobotPose measured = state;
        measured.x += cfg.noise_dy_x * rng.normal();
        measured.y += cfg.noise_dy_y * rng.normal();
        measured.phi = wrap_angle(measured.phi + cfg.noise_dy_phi * rng.normal());
        const TrackingError err_meas = compute_error(measured, target);
        const ControlCommand cmd =
            compute_command(err_meas, cfg.v_t, target.phi_dot, gains, cfg.limits);

        if (step % log_every == 0 && t >= cfg.cost_warmup_s) {
            const auto [e_lat, e_head] = lateral_heading_errors(measured, track);
            result.log.samples.push_back(
                {t, measured, target, err_meas, cmd, e_lat, e_head});
        }

        double v_applied = cmd.v + cfg.noise_du_v * rng.normal();
        double omega_applied = cmd.omega + cfg.noise_du_omega * rng.normal();
        v_applied = std::clamp(v_applied, -cfg.limits.v_max, cfg.limits.v_max);
        omega_applied = std::clamp(omega_applied, -cfg.limits.omega_max, cfg.limits.omega_max);

        state = rk4_unicycle_step(state, v_applied, omega_applied, dt);
    }

    // Unreachable with progress-based completion, kept as a hard stop.
    result.completed = false;
    result.completed_length = std::min(cfg.v_t * timeout, lap_len);
    result.diverged_at = timeout;
    return result;
}

void write_lap_csv(std::ostream& out, const LapLog& log) {
    out << "t,x,y,phi,x_t,y_t,phi_t,v_cmd,omega_cmd,rho,alpha,beta,e_lat,e_head\n";
    const auto previous = out.precision(12);
    for (const LapSample& s : log.samples) {
        out << s.t << ',' << s.robot.x << ',' << s.robot.y << ',' << s.robot.phi << ','
            << s.target.x << ',' << s.target.y << ',' << s.target.phi << ','
            << s.cmd.v << ',' << s.cmd.omega << ',' << s.err.rho << ','
            << s.err.alpha << ',' << s.err.beta << ',' << s.e_lat << ',' << s.e_head
            << '\n';
    }
    out.precision(previous);
}

} // namespace pathtune
