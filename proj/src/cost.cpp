#include "pathtune/cost.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace pathtune {

namespace {

double median_of(std::vector<double> values) {
    const std::size_t n = values.size();
    std::sort(values.begin(), values.end());
    if (n % 2 == 1) {
        return values[n / 2];
    }
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Sum of |e| divided by the per-lap median of |e|, accumulated as
// sum(|e|/median) so a constant series lands on K+1 exactly. A channel whose
// median vanishes is assigned that same constant-series value, the limit of
// the ratio as a constant series goes to zero.
double normalized_term(const std::vector<double>& abs_errors, double* median_out,
                       bool* degenerate_out) {
    const double median = median_of(abs_errors);
    *median_out = median;
    if (median < 1e-12) {
        *degenerate_out = true;
        return static_cast<double>(abs_errors.size());
    }
    *degenerate_out = false;
    double total = 0.0;
    for (double e : abs_errors) total += e / median;
    return total;
}

} // namespace

CostBreakdown evaluate_cost(const LapResult& lap, double w, double lambda_pen) {
    if (lap.log.samples.size() < 2) {
        throw std::invalid_argument("evaluate_cost: need at least 2 samples");
    }
    if (!(w > 0.0)) {
        throw std::invalid_argument("evaluate_cost: w must be > 0");
    }
    if (lambda_pen < 0.0) {
        throw std::invalid_argument("evaluate_cost: lambda_pen must be >= 0");
    }

    std::vector<double> abs_lat;
    std::vector<double> abs_head;
    abs_lat.reserve(lap.log.samples.size());
    abs_head.reserve(lap.log.samples.size());
    for (const LapSample& s : lap.log.samples) {
        abs_lat.push_back(std::abs(s.e_lat));
        abs_head.push_back(std::abs(s.e_head));
    }

    CostBreakdown out;
    out.w = w;
    out.lambda_pen = lambda_pen;
    out.j_lat = normalized_term(abs_lat, &out.median_lat, &out.degenerate_lat);
    out.j_head = normalized_term(abs_head, &out.median_head, &out.degenerate_head);
    out.j = out.j_lat + w * out.j_head;
    out.completion_ratio =
        lap.lap_len > 0.0 ? std::clamp(lap.completed_length / lap.lap_len, 0.0, 1.0) : 0.0;
    out.j_bo = out.j + lambda_pen * (1.0 - out.completion_ratio);
    return out;
}

} // namespace pathtune
