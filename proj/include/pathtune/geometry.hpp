#pragma once

#include <cmath>

namespace pathtune {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Distance below which the robot-to-target geometry is treated as degenerate.
inline constexpr double kRhoEps = 1e-6;

/// Wraps an angle to the half-open interval (-pi, pi]; wrap(-pi) == +pi.
double wrap_angle(double a);

struct RobotPose {
    double x = 0.0;   // m
    double y = 0.0;   // m
    double phi = 0.0; // rad, in (-pi, pi]
};

struct TargetState; // track.hpp

/// Polar tracking error between the robot pose and the moving target:
/// rho   distance to the target,
/// theta_t line-of-sight angle from robot to target (world frame),
/// alpha  robot heading error relative to the line of sight,
/// beta   target heading misalignment relative to the line of sight.
struct TrackingError {
    double rho = 0.0;
    double theta_t = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    bool degenerate = false; // rho below kRhoEps; theta_t fell back to robot heading
};

TrackingError compute_error(const RobotPose& robot, const TargetState& target);

struct ErrorRates {
    double rho_dot = 0.0;
    double alpha_dot = 0.0;
    double beta_dot = 0.0;
};

/// Time derivatives of (rho, alpha, beta) for given robot commands and target
/// motion. Requires err.rho > kRhoEps (the expressions divide by rho).
ErrorRates error_derivatives(const TrackingError& err, double v, double omega,
                             double v_t, double phi_t_dot);

} // namespace pathtune
