#include "pathtune/gp.hpp"

#include "pathtune/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pathtune {

namespace {

constexpr double kSqrt5 = 2.23606797749978969640917366873128;
constexpr double kTwoPi = 6.283185307179586476925286766559;

Eigen::Vector4d normalize_input(const Eigen::Vector4d& z, const Eigen::Vector4d& lo,
                                const Eigen::Vector4d& hi) {
    Eigen::Vector4d u;
    for (int d = 0; d < 4; ++d) {
        const double span = hi[d] - lo[d];
        u[d] = span > 0.0 ? (z[d] - lo[d]) / span : z[d];
    }
    return u;
}

double kernel_normalized(const Eigen::Vector4d& a, const Eigen::Vector4d& b,
                         const KernelHyperparams& hyper) {
    double r2 = 0.0;
    for (int d = 0; d < 4; ++d) {
        const double diff = (a[d] - b[d]) / hyper.length_scales[d];
        r2 += diff * diff;
    }
    const double r = std::sqrt(r2);
    return hyper.signal_variance * (1.0 + kSqrt5 * r + 5.0 * r2 / 3.0) *
           std::exp(-kSqrt5 * r);
}

struct Factorization {
    Eigen::MatrixXd L;
    Eigen::VectorXd alpha;
    double jitter = 0.0;
    double lml = 0.0;
};

// Cholesky of K + sigma_n^2 I + jitter I with jitter escalating from
// 1e-10 to 1e-4 of the mean diagonal before giving up.
Factorization factorize(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        const KernelHyperparams& hyper) {
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double k = kernel_normalized(X.row(i).transpose(), X.row(j).transpose(), hyper);
            K(i, j) = k;
            K(j, i) = k;
        }
    }
    const double trace_mean = K.trace() / static_cast<double>(n) + hyper.noise_variance;

    for (double scale = 1e-10; scale <= 1.0001e-4; scale *= 10.0) {
        const double jitter = scale * trace_mean;
        Eigen::MatrixXd A = K;
        A.diagonal().array() += hyper.noise_variance + jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(A);
        if (llt.info() != Eigen::Success) {
            continue;
        }
        Factorization f;
        f.L = llt.matrixL();
        f.alpha = llt.solve(y);
        f.jitter = jitter;
        double log_det = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            log_det += std::log(f.L(i, i));
        }
        f.lml = -0.5 * y.dot(f.alpha) - log_det -
                0.5 * static_cast<double>(n) * std::log(kTwoPi);
        return f;
    }
    throw std::runtime_error("gp: covariance not positive definite after maximum jitter");
}

} // namespace

void KernelHyperparams::validate() const {
    bool ok = signal_variance > 0.0 && noise_variance > 0.0;
    for (double l : length_scales) ok = ok && l > 0.0;
    if (!ok) {
        throw std::invalid_argument("KernelHyperparams: all entries must be > 0");
    }
}

double matern52_ard(const Eigen::Vector4d& a, const Eigen::Vector4d& b,
                    const KernelHyperparams& hyper) {
    return kernel_normalized(a, b, hyper);
}

void GpDataset::add(const Eigen::Vector4d& z, double y) {
    if (!std::isfinite(y)) {
        throw std::invalid_argument("GpDataset: observation must be finite");
    }
    inputs.push_back(z);
    observations.push_back(y);
}

Eigen::Vector4d GpDataset::normalized(const Eigen::Vector4d& z) const {
    return normalize_input(z, z_lower, z_upper);
}

GpModel GpModel::fit(const GpDataset& data, const KernelHyperparams& hyper,
                     ObservationScaling scaling) {
    hyper.validate();
    const std::size_t n = data.size();
    if (n == 0) {
        throw std::invalid_argument("GpModel::fit: empty dataset");
    }
    if (data.observations.size() != n) {
        throw std::invalid_argument("GpModel::fit: inputs/observations size mismatch");
    }

    GpModel model;
    model.hyper_ = hyper;
    model.z_lower_ = data.z_lower;
    model.z_upper_ = data.z_upper;

    model.X_.resize(static_cast<Eigen::Index>(n), 4);
    for (std::size_t i = 0; i < n; ++i) {
        model.X_.row(static_cast<Eigen::Index>(i)) = data.normalized(data.inputs[i]).transpose();
    }

    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(data.observations.data(),
                                                          static_cast<Eigen::Index>(n));
    if (scaling == ObservationScaling::standardize) {
        model.y_offset_ = y.mean();
        const double variance = (y.array() - model.y_offset_).square().mean();
        const double stddev = std::sqrt(variance);
        model.y_scale_ = stddev > 1e-12 ? stddev : 1.0;
        y = (y.array() - model.y_offset_) / model.y_scale_;
    }
    model.y_ = y;

    Factorization f = factorize(model.X_, model.y_, hyper);
    model.L_ = std::move(f.L);
    model.alpha_ = std::move(f.alpha);
    model.jitter_ = f.jitter;
    model.lml_ = f.lml;
    return model;
}

PosteriorPrediction GpModel::predict(const Eigen::Vector4d& z) const {
    const Eigen::Vector4d q = normalize_input(z, z_lower_, z_upper_);
    const Eigen::Index n = X_.rows();
    Eigen::VectorXd k_star(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k_star[i] = kernel_normalized(X_.row(i).transpose(), q, hyper_);
    }
    const double mean = k_star.dot(alpha_);
    const Eigen::VectorXd v = L_.triangularView<Eigen::Lower>().solve(k_star);
    const double variance = kernel_normalized(q, q, hyper_) - v.squaredNorm();

    PosteriorPrediction pred;
    pred.mean = y_offset_ + y_scale_ * mean;
    pred.variance = y_scale_ * y_scale_ * std::max(variance, 0.0);
    return pred;
}

double log_marginal_likelihood(const GpDataset& data, const KernelHyperparams& hyper) {
    hyper.validate();
    const std::size_t n = data.size();
    if (n == 0) {
        throw std::invalid_argument("log_marginal_likelihood: empty dataset");
    }
    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), 4);
    for (std::size_t i = 0; i < n; ++i) {
        X.row(static_cast<Eigen::Index>(i)) = data.normalized(data.inputs[i]).transpose();
    }
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(
        data.observations.data(), static_cast<Eigen::Index>(n));
    return factorize(X, y, hyper).lml;
}

namespace {

struct HyperVector {
    // log(sigma_f^2), log(l_1..l_4), log(sigma_n^2)
    std::array<double, 6> p{};

    static HyperVector from(const KernelHyperparams& h) {
        HyperVector v;
        v.p[0] = std::log(h.signal_variance);
        for (int d = 0; d < 4; ++d) v.p[1 + d] = std::log(h.length_scales[d]);
        v.p[5] = std::log(h.noise_variance);
        return v;
    }

    KernelHyperparams to_hyper() const {
        KernelHyperparams h;
        h.signal_variance = std::exp(p[0]);
        for (int d = 0; d < 4; ++d) h.length_scales[d] = std::exp(p[1 + d]);
        h.noise_variance = std::exp(p[5]);
        return h;
    }
};

} // namespace

KernelHyperparams optimize_hypers(const GpDataset& data, const KernelHyperparams& init,
                                  std::uint64_t seed, const HyperBounds& bounds) {
    init.validate();
    if (data.size() < 2) {
        throw std::invalid_argument("optimize_hypers: need at least 2 observations");
    }

    // Fit on standardized observations, matching GpModel::fit's default mode.
    GpDataset scaled = data;
    {
        Eigen::Map<Eigen::VectorXd> y(scaled.observations.data(),
                                      static_cast<Eigen::Index>(scaled.observations.size()));
        const double mean = y.mean();
        const double stddev = std::sqrt((y.array() - mean).square().mean());
        const double scale = stddev > 1e-12 ? stddev : 1.0;
        y = (y.array() - mean) / scale;
    }

    const std::array<double, 6> lo = {std::log(bounds.signal_variance_min),
                                      std::log(bounds.length_scale_min),
                                      std::log(bounds.length_scale_min),
                                      std::log(bounds.length_scale_min),
                                      std::log(bounds.length_scale_min),
                                      std::log(bounds.noise_variance_min)};
    const std::array<double, 6> hi = {std::log(bounds.signal_variance_max),
                                      std::log(bounds.length_scale_max),
                                      std::log(bounds.length_scale_max),
                                      std::log(bounds.length_scale_max),
                                      std::log(bounds.length_scale_max),
                                      std::log(bounds.noise_variance_max)};

    auto clamp_vec = [&](HyperVector v) {
        for (int i = 0; i < 6; ++i) v.p[i] = std::clamp(v.p[i], lo[i], hi[i]);
        return v;
    };
    auto evaluate = [&](const HyperVector& v) {
        try {
            return log_marginal_likelihood(scaled, v.to_hyper());
        } catch (const std::runtime_error&) {
            return -std::numeric_limits<double>::infinity();
        }
    };

    constexpr int kRestarts = 8;
    constexpr int kEvalBudget = 200;

    Rng rng(seed);
    HyperVector best_v = clamp_vec(HyperVector::from(init));
    double best_lml = evaluate(best_v);

    for (int restart = 0; restart < kRestarts; ++restart) {
        HyperVector v;
        if (restart == 0) {
            v = clamp_vec(HyperVector::from(init));
        } else {
            for (int i = 0; i < 6; ++i) v.p[i] = rng.uniform(lo[i], hi[i]);
        }
        double current = evaluate(v);
        int evals = 1;
        double step = 0.5;
        while (evals < kEvalBudget && step > 1e-3) {
            bool improved = false;
            for (int i = 0; i < 6 && evals < kEvalBudget; ++i) {
                for (double dir : {step, -step}) {
                    HyperVector trial = v;
                    trial.p[i] = std::clamp(trial.p[i] + dir, lo[i], hi[i]);
                    const double lml = evaluate(trial);
                    ++evals;
                    if (lml > current) {
                        current = lml;
                        v = trial;
                        improved = true;
                        break;
                    }
                    if (evals >= kEvalBudget) break;
                }
            }
            if (!improved) step *= 0.5;
        }
        if (current > best_lml) {
            best_lml = current;
            best_v = v;
        }
    }

    // Hill-climbing contract: never return something worse than init.
    const double init_lml = evaluate(HyperVector::from(init));
    if (!(best_lml >= init_lml)) {
        return init;
    }
    return best_v.to_hyper();
}

} // namespace pathtune
