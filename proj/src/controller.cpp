#include "pathtune/controller.hpp"

#include <algorithm>
#include <stdexcept>

namespace pathtune {

void GainVector::validate() const {
    if (!(lambda_v > 0.0 && lambda_a > 0.0 && k1 > 0.0 && k2 > 0.0)) {
        throw std::invalid_argument("GainVector: all gains must be > 0");
    }
}

double linear_velocity(const TrackingError& err, double v_t, const GainVector& g) {
    return (v_t * std::cos(err.beta) + g.lambda_v * err.rho) * std::cos(err.alpha);
}

AngularVelocityResult angular_velocity(const TrackingError& err, double v_t,
                                       double phi_t_dot, const GainVector& g) {
    if (!(err.rho > 0.0)) {
        throw std::domain_error("angular_velocity: rho must be > 0");
    }
    const double rho = std::max(err.rho, kRhoEps);
    const double sa = std::sin(err.alpha);
    const double ca = std::cos(err.alpha);
    const double sb = std::sin(err.beta);
    const double cb = std::cos(err.beta);
    const double ratio = g.k1 / g.k2;

    AngularVelocityResult result;
    result.guard_active = std::abs(sa) <= kAlphaEps;
    // Residual 1/sin(alpha) factors use the clamped value inside the guard
    // band; everything else is continuous through alpha = 0.
    const double sa_safe = result.guard_active ? (sa < 0.0 ? -kAlphaEps : kAlphaEps) : sa;

    double omega = g.lambda_a * sa;
    omega += v_t * sa * ca * cb / rho;
    omega -= v_t * sb / rho;
    omega += ratio * v_t * sb * cb * ca / rho;
    omega -= ratio * v_t * sb * sb / (rho * sa_safe);
    omega += g.lambda_v * sa * ca;
    omega += ratio * g.lambda_v * ca * sb;
    omega -= ratio * (sb / sa_safe) * phi_t_dot;

    result.omega = omega;
    return result;
}

ControlCommand compute_command(const TrackingError& err, double v_t,
                               double phi_t_dot, const GainVector& g,
                               const ControlLimits& limits) {
    const double v_raw = linear_velocity(err, v_t, g);
    const AngularVelocityResult ang = angular_velocity(err, v_t, phi_t_dot, g);

    ControlCommand cmd;
    cmd.v = std::clamp(v_raw, -limits.v_max, limits.v_max);
    cmd.omega = std::clamp(ang.omega, -limits.omega_max, limits.omega_max);
    cmd.v_saturated = std::abs(v_raw) > limits.v_max;
    cmd.omega_saturated = std::abs(ang.omega) > limits.omega_max;
    cmd.guard_active = ang.guard_active;
    return cmd;
}

LyapunovTerms lyapunov_value(const TrackingError& err, const GainVector& g) {
    LyapunovTerms terms;
    terms.v1 = 0.5 * err.rho * err.rho;
    terms.v2 = (1.0 - std::cos(err.alpha)) / g.k1 + (1.0 - std::cos(err.beta)) / g.k2;
    terms.total = terms.v1 + terms.v2;
    return terms;
}

double vdot2_closed_form(const TrackingError& err, const GainVector& g) {
    const double sa = std::sin(err.alpha);
    return -(g.lambda_a / g.k1) * sa * sa;
}

} // namespace pathtune
