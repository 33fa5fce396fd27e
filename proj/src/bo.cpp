#include "pathtune/bo.hpp"

#include "pathtune/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

namespace pathtune {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880168872420970;
constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438;

double normal_cdf(double u) { return 0.5 * std::erfc(-u / kSqrt2); }
double normal_pdf(double u) { return kInvSqrt2Pi * std::exp(-0.5 * u * u); }

std::array<double, 4> gain_array(const GainVector& g) {
    return {g.lambda_v, g.lambda_a, g.k1, g.k2};
}

GainVector gain_from_array(const std::array<double, 4>& a) {
    return {a[0], a[1], a[2], a[3]};
}

} // namespace

void SearchDomain::validate() const {
    const auto lo = gain_array(lower);
    const auto hi = gain_array(upper);
    static const char* names[] = {"lambda_v", "lambda_a", "k1", "k2"};
    for (int d = 0; d < 4; ++d) {
        if (!(lo[d] > 0.0) || !(lo[d] < hi[d])) {
            throw std::invalid_argument(std::string("SearchDomain: need 0 < lower < upper for ") +
                                        names[d]);
        }
    }
}

bool SearchDomain::contains(const GainVector& g) const {
    const auto v = gain_array(g);
    const auto lo = gain_array(lower);
    const auto hi = gain_array(upper);
    for (int d = 0; d < 4; ++d) {
        if (v[d] < lo[d] || v[d] > hi[d]) return false;
    }
    return true;
}

Eigen::Vector4d SearchDomain::log_lower() const { return to_log(lower); }
Eigen::Vector4d SearchDomain::log_upper() const { return to_log(upper); }

Eigen::Vector4d SearchDomain::to_log(const GainVector& g) {
    const auto v = gain_array(g);
    Eigen::Vector4d z;
    for (int d = 0; d < 4; ++d) z[d] = std::log(v[d]);
    return z;
}

GainVector SearchDomain::to_gains(const Eigen::Vector4d& z) const {
    const auto lo = gain_array(lower);
    const auto hi = gain_array(upper);
    std::array<double, 4> v{};
    for (int d = 0; d < 4; ++d) {
        v[d] = std::clamp(std::exp(z[d]), lo[d], hi[d]);
    }
    return gain_from_array(v);
}

Eigen::Vector4d SearchDomain::normalize(const Eigen::Vector4d& z) const {
    const Eigen::Vector4d lo = log_lower();
    const Eigen::Vector4d hi = log_upper();
    return (z - lo).cwiseQuotient(hi - lo);
}

Eigen::Vector4d SearchDomain::denormalize(const Eigen::Vector4d& u) const {
    const Eigen::Vector4d lo = log_lower();
    const Eigen::Vector4d hi = log_upper();
    return lo + u.cwiseProduct(hi - lo);
}

SearchDomain SearchDomain::defaults() {
    SearchDomain d;
    d.lower = {1e-4, 1e-3, 1e-2, 1e-1};
    d.upper = {0.5, 1.5, 10.0, 100.0};
    return d;
}

std::vector<GainVector> warm_start(const SearchDomain& domain, const GainVector& baseline,
                                   int n_init, std::uint64_t seed) {
    domain.validate();
    baseline.validate();
    if (n_init < 1) {
        throw std::invalid_argument("warm_start: n_init must be >= 1");
    }
    if (!domain.contains(baseline)) {
        throw std::invalid_argument("warm_start: baseline outside the search domain");
    }

    // 1 baseline + local perturbations + Latin hypercube, split 1+6+8 at the
    // stock size of 15 and proportionally otherwise.
    const int n_local = static_cast<int>((static_cast<long>(n_init) - 1) * 6 / 14);
    const int n_lhs = n_init - 1 - n_local;

    std::vector<GainVector> points;
    points.reserve(static_cast<std::size_t>(n_init));
    points.push_back(baseline);

    Rng rng(seed);
    const Eigen::Vector4d base_u = domain.normalize(SearchDomain::to_log(baseline));
    for (int i = 0; i < n_local; ++i) {
        Eigen::Vector4d u;
        for (int d = 0; d < 4; ++d) {
            u[d] = std::clamp(base_u[d] + 0.1 * rng.normal(), 0.0, 1.0);
        }
        points.push_back(domain.to_gains(domain.denormalize(u)));
    }

    if (n_lhs > 0) {
        std::array<std::vector<int>, 4> strata;
        for (int d = 0; d < 4; ++d) {
            strata[d].resize(static_cast<std::size_t>(n_lhs));
            std::iota(strata[d].begin(), strata[d].end(), 0);
            rng.shuffle(strata[d]);
        }
        for (int i = 0; i < n_lhs; ++i) {
            Eigen::Vector4d u;
            for (int d = 0; d < 4; ++d) {
                u[d] = (static_cast<double>(strata[d][static_cast<std::size_t>(i)]) +
                        rng.uniform01()) /
                       static_cast<double>(n_lhs);
            }
            points.push_back(domain.to_gains(domain.denormalize(u)));
        }
    }
    return points;
}

double expected_improvement(const PosteriorPrediction& pred, double j_min) {
    if (pred.variance < 0.0) {
        throw std::invalid_argument("expected_improvement: negative variance");
    }
    const double gap = j_min - pred.mean;
    const double sigma = std::sqrt(pred.variance);
    if (sigma == 0.0) {
        return std::max(gap, 0.0);
    }
    const double u = gap / sigma;
    return gap * normal_cdf(u) + sigma * normal_pdf(u);
}

namespace {

// 4-dimensional Sobol sequence (32-bit direction numbers, Gray-code order)
// with a per-dimension digital shift derived from the seed.
class Sobol4 {
public:
    explicit Sobol4(std::uint64_t seed) {
        // Primitive polynomial setup per dimension: degree s, coefficient bits
        // a, and initial odd direction integers m.
        struct Def {
            int s;
            unsigned a;
            std::array<unsigned, 3> m;
        };
        static const std::array<Def, 4> defs = {{{0, 0, {0, 0, 0}},   // van der Corput
                                                 {1, 0, {1, 0, 0}},
                                                 {2, 1, {1, 3, 0}},
                                                 {3, 1, {1, 3, 1}}}};
        for (int d = 0; d < 4; ++d) {
            const Def& def = defs[static_cast<std::size_t>(d)];
            std::array<std::uint32_t, 32> m{};
            if (def.s == 0) {
                for (int j = 0; j < 32; ++j) m[static_cast<std::size_t>(j)] = 1;
            } else {
                for (int j = 0; j < def.s; ++j) {
                    m[static_cast<std::size_t>(j)] = def.m[static_cast<std::size_t>(j)];
                }
                for (int j = def.s; j < 32; ++j) {
                    std::uint32_t val = m[static_cast<std::size_t>(j - def.s)] ^
                                        (m[static_cast<std::size_t>(j - def.s)] << def.s);
                    for (int t = 1; t < def.s; ++t) {
                        if ((def.a >> (def.s - 1 - t)) & 1u) {
                            val ^= m[static_cast<std::size_t>(j - t)] << t;
                        }
                    }
                    m[static_cast<std::size_t>(j)] = val;
                }
            }
            for (int j = 0; j < 32; ++j) {
                v_[d][static_cast<std::size_t>(j)] =
                    m[static_cast<std::size_t>(j)] << (31 - j);
            }
            shift_[d] = static_cast<std::uint32_t>(mix_seed(seed, static_cast<std::uint64_t>(d)));
            state_[d] = 0;
        }
    }

    Eigen::Vector4d next() {
        Eigen::Vector4d point;
        for (int d = 0; d < 4; ++d) {
            point[d] = static_cast<double>(state_[d] ^ shift_[d]) * 0x1.0p-32;
        }
        const unsigned bit = static_cast<unsigned>(std::countr_zero(~index_));
        for (int d = 0; d < 4; ++d) {
            state_[d] ^= v_[d][bit];
        }
        ++index_;
        return point;
    }

private:
    std::array<std::array<std::uint32_t, 32>, 4> v_{};
    std::array<std::uint32_t, 4> state_{};
    std::array<std::uint32_t, 4> shift_{};
    std::uint64_t index_ = 0;
};

} // namespace

std::vector<Eigen::Vector4d> sobol_candidates(int count, std::uint64_t seed) {
    Sobol4 sobol(seed);
    std::vector<Eigen::Vector4d> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        out.push_back(sobol.next());
    }
    return out;
}

namespace {

struct ScoredPoint {
    Eigen::Vector4d u; // normalized log-gain coordinates
    double ei = 0.0;
    double mean = 0.0;
};

// (ei, mean, order) lexicographic preference: higher EI, then lower posterior
// mean, then the earlier candidate.
bool better_than(const ScoredPoint& a, const ScoredPoint& b) {
    if (a.ei != b.ei) return a.ei > b.ei;
    return a.mean < b.mean;
}

} // namespace

AcquisitionResult maximize_acquisition(const GpModel& model, const SearchDomain& domain,
                                       double j_min, std::uint64_t seed) {
    auto score = [&](const Eigen::Vector4d& u) {
        ScoredPoint p;
        p.u = u;
        const PosteriorPrediction pred = model.predict(domain.denormalize(u));
        p.ei = expected_improvement(pred, j_min);
        p.mean = pred.mean;
        return p;
    };

    std::vector<ScoredPoint> scored;
    scored.reserve(kAcquisitionCandidates);
    for (const Eigen::Vector4d& u : sobol_candidates(kAcquisitionCandidates, seed)) {
        scored.push_back(score(u));
    }

    constexpr int kRefineStarts = 8;
    std::vector<std::size_t> order(scored.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(),
                      order.begin() + std::min<std::size_t>(kRefineStarts, order.size()),
                      order.end(), [&](std::size_t a, std::size_t b) {
                          if (scored[a].ei != scored[b].ei) return scored[a].ei > scored[b].ei;
                          if (scored[a].mean != scored[b].mean) return scored[a].mean < scored[b].mean;
                          return a < b;
                      });

    // Refinement starts: the best raw candidates plus the posterior-mean
    // minimizer among them, so the incumbent basin always gets a polish.
    std::vector<ScoredPoint> starts;
    for (std::size_t k = 0; k < std::min<std::size_t>(kRefineStarts, order.size()); ++k) {
        starts.push_back(scored[order[k]]);
    }
    {
        std::size_t lowest_mean = 0;
        for (std::size_t i = 1; i < scored.size(); ++i) {
            if (scored[i].mean < scored[lowest_mean].mean) lowest_mean = i;
        }
        starts.push_back(scored[lowest_mean]);
    }

    ScoredPoint best = starts.front();
    for (std::size_t k = 0; k < starts.size(); ++k) {
        ScoredPoint current = starts[k];
        double step = 0.05;
        for (int iter = 0; iter < 100 && step > 1e-4; ++iter) {
            ScoredPoint candidate = current;
            bool improved = false;
            for (int d = 0; d < 4; ++d) {
                for (double dir : {step, -step}) {
                    Eigen::Vector4d u = current.u;
                    u[d] = std::clamp(u[d] + dir, 0.0, 1.0);
                    const ScoredPoint trial = score(u);
                    if (better_than(trial, candidate)) {
                        candidate = trial;
                        improved = true;
                    }
                }
            }
            if (improved) {
                current = candidate;
            } else {
                step *= 0.5;
            }
        }
        if (better_than(current, best)) {
            best = current;
        }
    }

    AcquisitionResult result;
    result.z = domain.denormalize(best.u);
    result.ei = best.ei;
    result.posterior_mean = best.mean;
    return result;
}

const char* to_string(IterationSource s) {
    switch (s) {
    case IterationSource::baseline: return "baseline";
    case IterationSource::space_filling: return "space_filling";
    case IterationSource::acquisition: return "acquisition";
    }
    return "unknown";
}

CampaignRecord run_campaign(const SearchDomain& domain, const GainVector& baseline,
                            const CampaignSettings& settings, const Evaluator& evaluate,
                            const IterationCallback& on_iteration) {
    domain.validate();
    if (settings.n_init < 1 || settings.n_init > settings.n_max) {
        throw std::invalid_argument("run_campaign: need 1 <= n_init <= n_max");
    }

    CampaignRecord record;
    record.seed = settings.seed;

    const KernelHyperparams default_hyper{};

    auto append = [&](const GainVector& theta, IterationSource source,
                      const EvalOutcome& outcome, const KernelHyperparams& hyper,
                      std::optional<double> ei) {
        IterationRecord it;
        it.index = static_cast<int>(record.iterations.size()) + 1;
        it.source = source;
        it.theta = theta;
        it.z = SearchDomain::to_log(theta);
        it.j_bo = outcome.j_bo;
        it.cost = outcome.cost;
        it.lap = outcome.lap;
        it.hyper = hyper;
        it.ei_at_selection = ei;
        record.iterations.push_back(it);

        const double prev_best =
            record.best_so_far.empty() ? std::numeric_limits<double>::infinity()
                                       : record.best_so_far.back();
        if (outcome.j_bo < prev_best) {
            record.best_index = it.index;
        }
        record.best_so_far.push_back(std::min(prev_best, outcome.j_bo));
        if (on_iteration) {
            on_iteration(record.iterations.back());
        }
    };

    auto run_evaluation = [&](const GainVector& theta, IterationSource source,
                              const KernelHyperparams& hyper, std::optional<double> ei) {
        if (!domain.contains(theta)) {
            throw CampaignAborted("run_campaign: proposed gains left the domain", record);
        }
        EvalOutcome outcome;
        try {
            outcome = evaluate(theta);
        } catch (const std::exception& e) {
            throw CampaignAborted(std::string("run_campaign: evaluator failed: ") + e.what(),
                                  record);
        }
        append(theta, source, outcome, hyper, ei);
    };

    const std::vector<GainVector> initial =
        warm_start(domain, baseline, settings.n_init, mix_seed(settings.seed, 0x5eedULL));
    for (std::size_t i = 0; i < initial.size(); ++i) {
        run_evaluation(initial[i],
                       i == 0 ? IterationSource::baseline : IterationSource::space_filling,
                       default_hyper, std::nullopt);
    }

    record.stop_reason = "budget";

    int low_ei_streak = 0;
    int stall_streak = 0;
    KernelHyperparams hyper = default_hyper;

    while (static_cast<int>(record.iterations.size()) < settings.n_max) {
        const int i = static_cast<int>(record.iterations.size());

        GpDataset data(domain.log_lower(), domain.log_upper());
        for (const IterationRecord& it : record.iterations) {
            data.add(it.z, it.j_bo);
        }
        // Warm-starting the refit from the previous iteration's fit keeps the
        // surrogate from jumping between rival likelihood optima.
        hyper = optimize_hypers(data, hyper,
                                mix_seed(settings.seed, 0x40000ULL + static_cast<std::uint64_t>(i)));
        const GpModel model = GpModel::fit(data, hyper);

        const double j_min = record.best_so_far.back();
        const AcquisitionResult acq = maximize_acquisition(
            model, domain, j_min, mix_seed(settings.seed, 0x80000ULL + static_cast<std::uint64_t>(i)));

        // The EI threshold applies on the standardized observation scale.
        const double ei_scaled = acq.ei / model.observation_scale();
        low_ei_streak = ei_scaled < settings.stopping.ei_tol ? low_ei_streak + 1 : 0;
        if (low_ei_streak >= settings.stopping.ei_patience) {
            record.stop_reason = "ei_converged";
            break;
        }

        const double best_before = record.best_so_far.back();
        run_evaluation(domain.to_gains(acq.z), IterationSource::acquisition, hyper, acq.ei);

        const double best_after = record.best_so_far.back();
        const bool improved =
            best_before - best_after > settings.stopping.stall_rel_tol * std::abs(best_before);
        stall_streak = improved ? 0 : stall_streak + 1;
        if (stall_streak >= settings.stopping.stall_window &&
            static_cast<int>(record.iterations.size()) < settings.n_max) {
            record.stop_reason = "jmin_stalled";
            break;
        }
    }

    return record;
}

} // namespace pathtune
