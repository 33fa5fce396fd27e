#include "pathtune/geometry.hpp"

#include "pathtune/track.hpp"

#include <stdexcept>

namespace pathtune {

double wrap_angle(double a) {
    if (!std::isfinite(a)) {
        throw std::invalid_argument("wrap_angle: non-finite angle");
    }
    double w = std::remainder(a, 2.0 * kPi); // in [-pi, pi]
    if (w <= -kPi) {
        w += 2.0 * kPi;
    }
    return w;
}

TrackingError compute_error(const RobotPose& robot, const TargetState& target) {
    const double dx = target.x - robot.x;
    const double dy = target.y - robot.y;

    TrackingError err;
    err.rho = std::hypot(dx, dy);
    if (err.rho < kRhoEps) {
        // Line of sight undefined at the target; fall back to the robot
        // heading so alpha is zero and continuous as rho -> 0.
        err.theta_t = robot.phi;
        err.degenerate = true;
    } else {
        err.theta_t = wrap_angle(std::atan2(dy, dx));
    }
    err.alpha = wrap_angle(err.theta_t - robot.phi);
    err.beta = wrap_angle(err.theta_t - target.phi);
    return err;
}

ErrorRates error_derivatives(const TrackingError& err, double v, double omega,
                             double v_t, double phi_t_dot) {
    if (err.rho <= kRhoEps) {
        throw std::domain_error("error_derivatives: rho too small");
    }
    const double sa = std::sin(err.alpha);
    const double ca = std::cos(err.alpha);
    const double sb = std::sin(err.beta);
    const double cb = std::cos(err.beta);

    ErrorRates rates;
    rates.rho_dot = v_t * cb - v * ca;
    const double swirl = (v * sa - v_t * sb) / err.rho;
    rates.alpha_dot = swirl - omega;
    rates.beta_dot = swirl - phi_t_dot;
    return rates;
}

} // namespace pathtune
