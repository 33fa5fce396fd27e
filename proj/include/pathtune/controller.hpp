#pragma once

#include "pathtune/geometry.hpp"

namespace pathtune {

/// The four tunable controller gains. All strictly positive.
struct GainVector {
    double lambda_v = 0.02; // 1/s, distance-error gain in the speed law
    double lambda_a = 0.25; // rad/s, heading-error gain in the steering law
    double k1 = 0.7;        // weight of the alpha term in the energy function
    double k2 = 50.0;       // weight of the beta term in the energy function

    /// Throws std::invalid_argument unless all four gains are > 0.
    void validate() const;
};

struct ControlLimits {
    double v_max = 4.0;     // m/s
    double omega_max = 2.0; // rad/s
};

/// |sin(alpha)| threshold below which the steering law's residual 1/sin(alpha)
/// factors are clamped to keep the command finite near the aligned state.
inline constexpr double kAlphaEps = 1e-3;

/// Speed law: v = (v_t cos(beta) + lambda_v rho) cos(alpha). Unsaturated.
double linear_velocity(const TrackingError& err, double v_t, const GainVector& g);

struct AngularVelocityResult {
    double omega = 0.0; // rad/s, unsaturated
    bool guard_active = false;
};

/// Steering law, evaluated term by term with every sin(alpha) factor that
/// cancels analytically already cancelled; the two terms with a residual
/// 1/sin(alpha) use sign(sin(alpha)) * kAlphaEps when |sin(alpha)| <= kAlphaEps
/// (sign(0) := +1). Requires err.rho > 0; rho below kRhoEps is clamped to it.
AngularVelocityResult angular_velocity(const TrackingError& err, double v_t,
                                       double phi_t_dot, const GainVector& g);

struct ControlCommand {
    double v = 0.0;     // m/s, after saturation
    double omega = 0.0; // rad/s, after saturation
    bool v_saturated = false;
    bool omega_saturated = false;
    bool guard_active = false;
};

/// Both laws plus symmetric saturation; the flags record whether the raw law
/// output exceeded the corresponding limit.
ControlCommand compute_command(const TrackingError& err, double v_t,
                               double phi_t_dot, const GainVector& g,
                               const ControlLimits& limits);

struct LyapunovTerms {
    double v1 = 0.0;    // 0.5 rho^2
    double v2 = 0.0;    // (1 - cos alpha)/k1 + (1 - cos beta)/k2
    double total = 0.0; // v1 + v2
};

LyapunovTerms lyapunov_value(const TrackingError& err, const GainVector& g);

/// Closed-loop time derivative of the heading part of the energy function
/// under the designed steering law: -(lambda_a / k1) sin^2(alpha). Always <= 0.
double vdot2_closed_form(const TrackingError& err, const GainVector& g);

} // namespace pathtune
