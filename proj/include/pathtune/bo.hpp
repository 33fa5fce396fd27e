#pragma once

#include "pathtune/controller.hpp"
#include "pathtune/cost.hpp"
#include "pathtune/gp.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pathtune {

/// Admissible gain box and its image in log space, where the optimizer works.
struct SearchDomain {
    GainVector lower;
    GainVector upper;

    /// Throws unless 0 < lower < upper componentwise.
    void validate() const;

    bool contains(const GainVector& g) const;

    Eigen::Vector4d log_lower() const;
    Eigen::Vector4d log_upper() const;

    static Eigen::Vector4d to_log(const GainVector& g);
    /// exp of each component, clamped to the box to absorb round-off.
    GainVector to_gains(const Eigen::Vector4d& z) const;

    /// Affine map of a log-gain vector onto [0,1]^4 and back.
    Eigen::Vector4d normalize(const Eigen::Vector4d& z) const;
    Eigen::Vector4d denormalize(const Eigen::Vector4d& u) const;

    /// The project's stock gain box.
    static SearchDomain defaults();
};

/// Warm-start design: the baseline itself, a handful of local log-space
/// perturbations around it (std 0.1 in normalized units, clipped to the box),
/// and Latin-hypercube samples over the whole box for the remainder.
/// For n_init = 15 the split is 1 + 6 + 8; other sizes scale the local share
/// proportionally. Deterministic in the seed.
std::vector<GainVector> warm_start(const SearchDomain& domain, const GainVector& baseline,
                                   int n_init, std::uint64_t seed);

/// Closed-form expected improvement of a Gaussian posterior below j_min.
/// For variance 0 this reduces to max(j_min - mean, 0).
double expected_improvement(const PosteriorPrediction& pred, double j_min);

/// Base-2 digitally shifted Sobol points in [0,1)^4. Exposed so the
/// acquisition sweep can be reproduced externally.
std::vector<Eigen::Vector4d> sobol_candidates(int count, std::uint64_t seed);

struct AcquisitionResult {
    Eigen::Vector4d z = Eigen::Vector4d::Zero(); // log-gain vector, inside the box
    double ei = 0.0;
    double posterior_mean = 0.0;
};

inline constexpr int kAcquisitionCandidates = 4096;

/// argmax EI over the box: 4096 Sobol candidates plus coordinate pattern
/// search started from the best 8. Ties resolve to the lower posterior mean,
/// then to the earlier candidate.
AcquisitionResult maximize_acquisition(const GpModel& model, const SearchDomain& domain,
                                       double j_min, std::uint64_t seed);

enum class IterationSource { baseline, space_filling, acquisition };

const char* to_string(IterationSource s);

/// Per-evaluation lap digest kept in the campaign record (the full log stays
/// with the caller).
struct LapSummary {
    bool completed = false;
    double completed_length = 0.0;
    double lap_len = 0.0;
    std::optional<double> diverged_at;
    double max_abs_e_lat = 0.0; // m
    double duration_s = 0.0;    // simulated seconds
};

struct EvalOutcome {
    double j_bo = 0.0;
    CostBreakdown cost;
    LapSummary lap;
};

struct IterationRecord {
    int index = 0; // 1-based
    IterationSource source = IterationSource::baseline;
    GainVector theta;
    Eigen::Vector4d z = Eigen::Vector4d::Zero();
    double j_bo = 0.0;
    CostBreakdown cost;
    LapSummary lap;
    KernelHyperparams hyper; // snapshot used when this point was selected
    std::optional<double> ei_at_selection; // empty for warm-start points
};

struct StoppingPolicy {
    double ei_tol = 1e-3; // on standardized observations
    int ei_patience = 3;  // consecutive below-threshold acquisitions
    // Consecutive non-improving iterations tolerated before stopping. The
    // stock value covers the whole 32-evaluation acquisition phase: at that
    // budget late improvements are common enough that cutting the loop short
    // costs more than the laps it saves.
    int stall_window = 17;
    double stall_rel_tol = 1e-3;
};

struct CampaignSettings {
    int n_init = 15;
    int n_max = 32;
    StoppingPolicy stopping{};
    std::uint64_t seed = 1;
};

struct CampaignRecord {
    std::vector<IterationRecord> iterations;
    std::vector<double> best_so_far; // running minimum of j_bo, non-increasing
    std::uint64_t seed = 0;
    std::string stop_reason;         // "budget", "ei_converged", "jmin_stalled"
    int best_index = 0;              // 1-based index of the argmin evaluation

    const IterationRecord& best() const { return iterations.at(best_index - 1); }
};

using Evaluator = std::function<EvalOutcome(const GainVector&)>;
using IterationCallback = std::function<void(const IterationRecord&)>;

/// Thrown when the evaluator fails mid-campaign; carries everything evaluated
/// so far so the caller can persist it.
struct CampaignAborted : std::runtime_error {
    CampaignAborted(const std::string& what, CampaignRecord partial)
        : std::runtime_error(what), partial(std::move(partial)) {}
    CampaignRecord partial;
};

/// The outer loop: evaluate the warm-start design, then alternate hyper
/// refitting, surrogate fitting, EI maximization and evaluation until the
/// budget or a stopping rule ends the campaign.
CampaignRecord run_campaign(const SearchDomain& domain, const GainVector& baseline,
                            const CampaignSettings& settings, const Evaluator& evaluate,
                            const IterationCallback& on_iteration = {});

} // namespace pathtune
