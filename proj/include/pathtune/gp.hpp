#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <vector>

namespace pathtune {

/// Kernel and noise hyperparameters. Length scale units refer to inputs after
/// they have been mapped to the unit box; signal/noise variances refer to the
/// observations as fitted (standardized by default, see ObservationScaling).
struct KernelHyperparams {
    double signal_variance = 1.0;                          // sigma_f^2
    std::array<double, 4> length_scales{0.3, 0.3, 0.3, 0.3}; // one per dimension
    double noise_variance = 1e-2;                          // sigma_n^2

    void validate() const; // throws unless everything is > 0
};

/// Box constraints used when fitting hyperparameters. The noise floor keeps
/// the surrogate from treating repeat-lap scatter as exact, which would kill
/// the incentive to re-sample near the incumbent.
struct HyperBounds {
    double length_scale_min = 0.05;
    double length_scale_max = 10.0;
    double signal_variance_min = 1e-3;
    double signal_variance_max = 1e3;
    double noise_variance_min = 1e-4;
    double noise_variance_max = 1e1;
};

/// ARD Matern-5/2: sigma_f^2 (1 + sqrt5 r + 5 r^2 / 3) exp(-sqrt5 r) with
/// r^2 = sum_d ((a_d - b_d) / l_d)^2.
double matern52_ard(const Eigen::Vector4d& a, const Eigen::Vector4d& b,
                    const KernelHyperparams& hyper);

/// Training set in log-gain space together with the box used to map inputs to
/// [0,1]^4 before any kernel evaluation.
struct GpDataset {
    GpDataset() = default;
    GpDataset(const Eigen::Vector4d& z_lower, const Eigen::Vector4d& z_upper)
        : z_lower(z_lower), z_upper(z_upper) {}

    Eigen::Vector4d z_lower = Eigen::Vector4d::Zero();
    Eigen::Vector4d z_upper = Eigen::Vector4d::Ones();
    std::vector<Eigen::Vector4d> inputs; // raw log-gain vectors
    std::vector<double> observations;

    void add(const Eigen::Vector4d& z, double y);
    std::size_t size() const { return inputs.size(); }
    Eigen::Vector4d normalized(const Eigen::Vector4d& z) const;
};

struct PosteriorPrediction {
    double mean = 0.0;
    double variance = 0.0; // >= 0
};

enum class ObservationScaling {
    none,        // fit the observations as given
    standardize, // center and scale by the sample std-dev, undone on prediction
};

/// Exact zero-mean GP regression backed by a Cholesky factorization of
/// K + sigma_n^2 I + jitter I. Immutable once fitted.
class GpModel {
public:
    static GpModel fit(const GpDataset& data, const KernelHyperparams& hyper,
                       ObservationScaling scaling = ObservationScaling::standardize);

    PosteriorPrediction predict(const Eigen::Vector4d& z) const;

    /// Marginal log-likelihood of the fitted (possibly standardized) targets.
    double log_marginal_likelihood() const { return lml_; }

    const KernelHyperparams& hyper() const { return hyper_; }
    double observation_offset() const { return y_offset_; }
    double observation_scale() const { return y_scale_; }
    double jitter() const { return jitter_; }
    std::size_t size() const { return static_cast<std::size_t>(X_.rows()); }

private:
    GpModel() = default;

    Eigen::MatrixXd X_;     // n x 4, normalized inputs
    Eigen::VectorXd y_;     // fitted targets
    Eigen::MatrixXd L_;     // lower Cholesky factor
    Eigen::VectorXd alpha_; // (K + sigma_n^2 I + jitter I)^{-1} y_
    KernelHyperparams hyper_;
    Eigen::Vector4d z_lower_ = Eigen::Vector4d::Zero();
    Eigen::Vector4d z_upper_ = Eigen::Vector4d::Ones();
    double y_offset_ = 0.0;
    double y_scale_ = 1.0;
    double jitter_ = 0.0;
    double lml_ = 0.0;
};

/// -1/2 y^T (K + sigma_n^2 I + jitter I)^{-1} y - 1/2 log det(...) - n/2 log 2pi
/// on the observations exactly as stored in the dataset (no standardization).
double log_marginal_likelihood(const GpDataset& data, const KernelHyperparams& hyper);

/// Multi-start pattern search over log-hyperparameter space, standardizing the
/// observations first (the campaign's fitting convention). The result never
/// has a lower marginal likelihood than `init` on the same standardized data.
KernelHyperparams optimize_hypers(const GpDataset& data, const KernelHyperparams& init,
                                  std::uint64_t seed = 0x9e3779b97f4a7c15ULL,
                                  const HyperBounds& bounds = {});

} // namespace pathtune
