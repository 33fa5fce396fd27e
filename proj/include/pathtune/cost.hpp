#pragma once

#include "pathtune/simulator.hpp"

namespace pathtune {

/// Scalar lap objective split into its pieces. j = j_lat + w * j_head, where
/// each channel is the sum of absolute errors normalized by that lap's median
/// absolute error; j_bo adds the incompletion penalty
/// lambda_pen * (1 - completion_ratio).
struct CostBreakdown {
    double j_lat = 0.0;
    double j_head = 0.0;
    double j = 0.0;
    double j_bo = 0.0;
    double w = 0.0;
    double lambda_pen = 0.0;
    double completion_ratio = 0.0; // in [0, 1]
    double median_lat = 0.0;       // m
    double median_head = 0.0;      // rad
    // Set when a channel's median was below 1e-12 and the normalized term was
    // defined as its constant-series value K+1.
    bool degenerate_lat = false;
    bool degenerate_head = false;
};

/// Requires lap.log.samples.size() >= 2, w > 0 and lambda_pen >= 0.
CostBreakdown evaluate_cost(const LapResult& lap, double w, double lambda_pen);

} // namespace pathtune
