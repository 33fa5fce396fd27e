#include "pathtune/bo.hpp"

#include "pathtune/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace pathtune;

namespace {

const GainVector kBaseline{0.02, 0.25, 0.7, 50.0};

bool same_gains(const GainVector& a, const GainVector& b) {
    return a.lambda_v == b.lambda_v && a.lambda_a == b.lambda_a && a.k1 == b.k1 &&
           a.k2 == b.k2;
}

// Deterministic pseudo-random objective (no noise) keyed on the gains; keeps
// EI alive so budget bookkeeping can be observed without early stopping.
EvalOutcome hash_objective(const GainVector& g) {
    const double x = 1e4 * (g.lambda_v + 3.1 * g.lambda_a + 0.7 * g.k1 + 0.013 * g.k2);
    EvalOutcome out;
    out.j_bo = 1000.0 + 400.0 * std::sin(x) + 100.0 * std::cos(2.3 * x);
    out.cost.j = out.j_bo;
    out.cost.j_bo = out.j_bo;
    out.cost.completion_ratio = 1.0;
    out.lap.completed = true;
    return out;
}

// Smooth deterministic bowl in log-gain space with its minimum inside the box.
Evaluator sphere_objective(const SearchDomain& domain, const Eigen::Vector4d& center_u) {
    return [domain, center_u](const GainVector& g) {
        const Eigen::Vector4d u = domain.normalize(SearchDomain::to_log(g));
        EvalOutcome out;
        out.j_bo = (u - center_u).squaredNorm();
        out.cost.j = out.j_bo;
        out.cost.j_bo = out.j_bo;
        out.cost.completion_ratio = 1.0;
        out.lap.completed = true;
        return out;
    };
}

} // namespace

TEST_CASE("search domain round trips and containment") {
    const SearchDomain domain = SearchDomain::defaults();
    CHECK_NOTHROW(domain.validate());
    CHECK(domain.contains(kBaseline));
    CHECK_FALSE(domain.contains(GainVector{1.0, 0.25, 0.7, 50.0})); // lambda_v above box

    Rng rng(4);
    for (int i = 0; i < 500; ++i) {
        GainVector g;
        g.lambda_v = std::exp(rng.uniform(std::log(1e-4), std::log(0.5)));
        g.lambda_a = std::exp(rng.uniform(std::log(1e-3), std::log(1.5)));
        g.k1 = std::exp(rng.uniform(std::log(1e-2), std::log(10.0)));
        g.k2 = std::exp(rng.uniform(std::log(0.1), std::log(100.0)));
        const GainVector back = domain.to_gains(SearchDomain::to_log(g));
        CHECK(back.lambda_v == doctest::Approx(g.lambda_v).epsilon(1e-14));
        CHECK(back.lambda_a == doctest::Approx(g.lambda_a).epsilon(1e-14));
        CHECK(back.k1 == doctest::Approx(g.k1).epsilon(1e-14));
        CHECK(back.k2 == doctest::Approx(g.k2).epsilon(1e-14));
        CHECK(domain.contains(back));
    }
}

TEST_CASE("warm start structure at the stock size") {
    const SearchDomain domain = SearchDomain::defaults();
    const auto points = warm_start(domain, kBaseline, 15, 42);
    REQUIRE(points.size() == 15);
    CHECK(same_gains(points[0], kBaseline));

    for (const GainVector& p : points) {
        CHECK(domain.contains(p));
    }

    // points 2-7: local cloud around the baseline in normalized log space
    const Eigen::Vector4d base_u = domain.normalize(SearchDomain::to_log(kBaseline));
    for (int i = 1; i <= 6; ++i) {
        const Eigen::Vector4d u =
            domain.normalize(SearchDomain::to_log(points[static_cast<std::size_t>(i)]));
        CHECK((u - base_u).lpNorm<Eigen::Infinity>() < 0.45); // ~4.5 sigma
    }

    // points 8-15: one sample in each of the 8 strata per dimension
    for (int d = 0; d < 4; ++d) {
        std::set<int> strata;
        for (int i = 7; i < 15; ++i) {
            const Eigen::Vector4d u =
                domain.normalize(SearchDomain::to_log(points[static_cast<std::size_t>(i)]));
            strata.insert(std::min(7, static_cast<int>(u[d] * 8.0)));
        }
        CHECK(strata.size() == 8);
    }
}

TEST_CASE("warm start edge cases") {
    const SearchDomain domain = SearchDomain::defaults();
    const auto single = warm_start(domain, kBaseline, 1, 9);
    REQUIRE(single.size() == 1);
    CHECK(same_gains(single[0], kBaseline));

    CHECK_THROWS_AS(warm_start(domain, GainVector{1.0, 0.25, 0.7, 50.0}, 15, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(warm_start(domain, kBaseline, 0, 1), std::invalid_argument);

    // deterministic in the seed
    const auto a = warm_start(domain, kBaseline, 15, 7);
    const auto b = warm_start(domain, kBaseline, 15, 7);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(same_gains(a[i], b[i]));
    }
}

TEST_CASE("expected improvement anchors") {
    CHECK(expected_improvement({0.0, 1.0}, 0.0) ==
          doctest::Approx(0.3989422804014327).epsilon(1e-9));
    CHECK(expected_improvement({-2.0, 0.0}, 0.0) == doctest::Approx(2.0));
    CHECK(expected_improvement({1.0, 1.0}, 0.0) ==
          doctest::Approx(0.08331547058768629).epsilon(1e-7));
}

TEST_CASE("expected improvement properties") {
    SUBCASE("non-negative everywhere") {
        Rng rng(3);
        for (int i = 0; i < 1000; ++i) {
            const PosteriorPrediction p{rng.uniform(-5, 5), rng.uniform(0.0, 4.0)};
            CHECK(expected_improvement(p, rng.uniform(-5, 5)) >= 0.0);
        }
    }
    SUBCASE("increasing in sigma at the incumbent mean") {
        double previous = 0.0;
        for (double sigma : {0.0, 0.1, 0.5, 1.0, 2.0}) {
            const double ei = expected_improvement({1.0, sigma * sigma}, 1.0);
            CHECK(ei >= previous);
            previous = ei;
        }
    }
    SUBCASE("vanishes as sigma goes to zero when the mean is worse") {
        for (double sigma : {1.0, 0.3, 0.1, 0.03, 0.01}) {
            const double ei = expected_improvement({1.0, sigma * sigma}, 0.0);
            CHECK(ei <= expected_improvement({1.0, 4.0 * sigma * sigma}, 0.0) + 1e-18);
        }
        CHECK(expected_improvement({1.0, 1e-12}, 0.0) < 1e-12);
        CHECK(expected_improvement({1.0, 0.0}, 0.0) == 0.0);
    }
    SUBCASE("sigma = 0 reduces to the deterministic gap") {
        CHECK(expected_improvement({3.0, 0.0}, 5.0) == doctest::Approx(2.0));
        CHECK(expected_improvement({7.0, 0.0}, 5.0) == 0.0);
    }
    CHECK_THROWS_AS(expected_improvement({0.0, -1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("sobol candidates cover the unit box") {
    const auto pts = sobol_candidates(4096, 11);
    REQUIRE(pts.size() == 4096);
    Eigen::Vector4d lo = Eigen::Vector4d::Ones();
    Eigen::Vector4d hi = Eigen::Vector4d::Zero();
    for (const auto& p : pts) {
        for (int d = 0; d < 4; ++d) {
            CHECK(p[d] >= 0.0);
            CHECK(p[d] < 1.0);
            lo[d] = std::min(lo[d], p[d]);
            hi[d] = std::max(hi[d], p[d]);
        }
    }
    for (int d = 0; d < 4; ++d) {
        CHECK(lo[d] < 0.01);
        CHECK(hi[d] > 0.99);
    }
    // per-dimension stratification at the 64-cell level
    for (int d = 0; d < 4; ++d) {
        std::set<int> cells;
        for (const auto& p : pts) {
            cells.insert(static_cast<int>(p[d] * 64.0));
        }
        CHECK(cells.size() == 64);
    }
    // different seeds shift the set
    const auto other = sobol_candidates(16, 12);
    CHECK((other[0] - pts[0]).norm() > 0.0);
}

TEST_CASE("acquisition explores away from a single observation") {
    const SearchDomain domain = SearchDomain::defaults();
    GpDataset data(domain.log_lower(), domain.log_upper());
    data.add(SearchDomain::to_log(kBaseline), 5.0);
    KernelHyperparams h;
    h.noise_variance = 1e-6;
    const GpModel model = GpModel::fit(data, h);

    const AcquisitionResult acq = maximize_acquisition(model, domain, 5.0, 21);
    const Eigen::Vector4d u_best = domain.normalize(acq.z);
    const Eigen::Vector4d u_obs = domain.normalize(SearchDomain::to_log(kBaseline));
    CHECK((u_best - u_obs).norm() > 0.05);

    const double ei_at_obs =
        expected_improvement(model.predict(SearchDomain::to_log(kBaseline)), 5.0);
    CHECK(acq.ei > ei_at_obs);
}

TEST_CASE("acquisition beats every raw candidate and stays in the box") {
    const SearchDomain domain = SearchDomain::defaults();
    Rng rng(432);
    GpDataset data(domain.log_lower(), domain.log_upper());
    for (int i = 0; i < 12; ++i) {
        Eigen::Vector4d u(rng.uniform01(), rng.uniform01(), rng.uniform01(), rng.uniform01());
        data.add(domain.denormalize(u), rng.uniform(10.0, 30.0));
    }
    const KernelHyperparams h = optimize_hypers(data, KernelHyperparams{}, 5);
    const GpModel model = GpModel::fit(data, h);
    double j_min = 1e300;
    for (double y : data.observations) j_min = std::min(j_min, y);

    const std::uint64_t seed = 99;
    const AcquisitionResult acq = maximize_acquisition(model, domain, j_min, seed);

    const Eigen::Vector4d u = domain.normalize(acq.z);
    for (int d = 0; d < 4; ++d) {
        CHECK(u[d] >= -1e-12);
        CHECK(u[d] <= 1.0 + 1e-12);
    }
    for (const Eigen::Vector4d& cand : sobol_candidates(kAcquisitionCandidates, seed)) {
        const double ei = expected_improvement(model.predict(domain.denormalize(cand)), j_min);
        CHECK(acq.ei >= ei - 1e-15);
    }
}

TEST_CASE("acquisition finds the basin of a deep interior minimum") {
    const SearchDomain domain = SearchDomain::defaults();
    const Eigen::Vector4d center(0.6, 0.4, 0.55, 0.45);
    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed * 7919);
        GpDataset data(domain.log_lower(), domain.log_upper());
        // dense deterministic sampling of the bowl
        for (int i = 0; i < 30; ++i) {
            Eigen::Vector4d u(rng.uniform01(), rng.uniform01(), rng.uniform01(),
                              rng.uniform01());
            data.add(domain.denormalize(u), (u - center).squaredNorm());
        }
        KernelHyperparams h;
        h.length_scales = {0.4, 0.4, 0.4, 0.4};
        h.noise_variance = 1e-5;
        const GpModel model = GpModel::fit(data, h);
        double j_min = 1e300;
        for (double y : data.observations) j_min = std::min(j_min, y);

        const AcquisitionResult acq = maximize_acquisition(model, domain, j_min, seed);
        if ((domain.normalize(acq.z) - center).norm() < 0.35) {
            ++hits;
        }
    }
    CHECK(hits >= 18); // >= 90% of seeds
}

TEST_CASE("campaign bookkeeping at full budget") {
    const SearchDomain domain = SearchDomain::defaults();
    CampaignSettings settings;
    settings.n_init = 15;
    settings.n_max = 32;
    settings.seed = 5;
    // disable the early-stop rules so the budget path is what's observed
    settings.stopping.ei_tol = 0.0;
    settings.stopping.stall_window = 1000;

    int callbacks = 0;
    const CampaignRecord record =
        run_campaign(domain, kBaseline, settings, hash_objective,
                     [&callbacks](const IterationRecord&) { ++callbacks; });

    CHECK(record.iterations.size() == 32);
    CHECK(callbacks == 32);
    CHECK(record.stop_reason == "budget");
    CHECK(record.iterations[0].source == IterationSource::baseline);
    for (int i = 1; i < 15; ++i) {
        CHECK(record.iterations[static_cast<std::size_t>(i)].source ==
              IterationSource::space_filling);
        CHECK_FALSE(record.iterations[static_cast<std::size_t>(i)].ei_at_selection);
    }
    for (int i = 15; i < 32; ++i) {
        CHECK(record.iterations[static_cast<std::size_t>(i)].source ==
              IterationSource::acquisition);
        CHECK(record.iterations[static_cast<std::size_t>(i)].ei_at_selection.has_value());
    }
    for (std::size_t i = 0; i < record.iterations.size(); ++i) {
        CHECK(record.iterations[i].index == static_cast<int>(i) + 1);
        CHECK(domain.contains(record.iterations[i].theta));
    }

    // best_so_far is the running minimum
    double best = 1e300;
    for (std::size_t i = 0; i < record.iterations.size(); ++i) {
        best = std::min(best, record.iterations[i].j_bo);
        CHECK(record.best_so_far[i] == doctest::Approx(best));
    }
    CHECK(record.best().j_bo == doctest::Approx(best));
}

TEST_CASE("a flat objective trips the stall rule") {
    const SearchDomain domain = SearchDomain::defaults();
    CampaignSettings settings;
    settings.n_init = 10;
    settings.n_max = 60;
    settings.seed = 5;
    // hash_objective rarely improves its own running minimum, so the default
    // eight-iteration stall window fires well before the budget
    const CampaignRecord record = run_campaign(domain, kBaseline, settings, hash_objective);
    CHECK(record.iterations.size() < 60);
    CHECK((record.stop_reason == "jmin_stalled" || record.stop_reason == "ei_converged"));
}

TEST_CASE("n_init equal to the budget gives pure space filling") {
    const SearchDomain domain = SearchDomain::defaults();
    CampaignSettings settings;
    settings.n_init = 8;
    settings.n_max = 8;
    settings.seed = 3;
    const CampaignRecord record = run_campaign(domain, kBaseline, settings, hash_objective);
    CHECK(record.iterations.size() == 8);
    for (const IterationRecord& it : record.iterations) {
        CHECK(it.source != IterationSource::acquisition);
    }
    CHECK(record.stop_reason == "budget");
}

TEST_CASE("campaigns are reproducible run to run") {
    const SearchDomain domain = SearchDomain::defaults();
    CampaignSettings settings;
    settings.n_init = 10;
    settings.n_max = 18;
    settings.seed = 777;

    const CampaignRecord a = run_campaign(domain, kBaseline, settings, hash_objective);
    const CampaignRecord b = run_campaign(domain, kBaseline, settings, hash_objective);
    REQUIRE(a.iterations.size() == b.iterations.size());
    for (std::size_t i = 0; i < a.iterations.size(); ++i) {
        CHECK(same_gains(a.iterations[i].theta, b.iterations[i].theta));
        CHECK(a.iterations[i].j_bo == b.iterations[i].j_bo);
        CHECK(a.iterations[i].hyper.signal_variance == b.iterations[i].hyper.signal_variance);
    }
    CHECK(a.stop_reason == b.stop_reason);
    CHECK(a.best_index == b.best_index);
}

TEST_CASE("campaign on a deterministic bowl beats random search") {
    const SearchDomain domain = SearchDomain::defaults();
    const Eigen::Vector4d center(0.62, 0.38, 0.51, 0.47);

    std::vector<double> bo_final, rs_final;
    for (std::uint64_t pair = 1; pair <= 20; ++pair) {
        const Evaluator objective = sphere_objective(domain, center);

        CampaignSettings settings;
        settings.n_init = 10;
        settings.n_max = 40;
        settings.seed = pair;
        // keep the loop alive on a noiseless objective
        settings.stopping.ei_tol = 0.0;
        settings.stopping.stall_window = 1000;
        const CampaignRecord bo = run_campaign(domain, kBaseline, settings, objective);
        bo_final.push_back(bo.best_so_far.back());

        // paired random search: same warm start, uniform continuation
        double best = 1e300;
        for (const GainVector& g : warm_start(domain, kBaseline, 10, mix_seed(pair, 0x5eedULL))) {
            best = std::min(best, objective(g).j_bo);
        }
        Rng rng(mix_seed(pair, 0xabcdULL));
        for (int i = 10; i < 40; ++i) {
            Eigen::Vector4d u(rng.uniform01(), rng.uniform01(), rng.uniform01(),
                              rng.uniform01());
            best = std::min(best, objective(domain.to_gains(domain.denormalize(u))).j_bo);
        }
        rs_final.push_back(best);
    }

    std::sort(bo_final.begin(), bo_final.end());
    std::sort(rs_final.begin(), rs_final.end());
    const double bo_median = 0.5 * (bo_final[9] + bo_final[10]);
    const double rs_median = 0.5 * (rs_final[9] + rs_final[10]);
    CHECK(bo_median <= 0.1 * rs_median);
}

TEST_CASE("evaluator failure aborts with the partial record preserved") {
    const SearchDomain domain = SearchDomain::defaults();
    CampaignSettings settings;
    settings.n_init = 6;
    settings.n_max = 12;
    settings.seed = 2;

    int calls = 0;
    const Evaluator flaky = [&calls](const GainVector& g) {
        if (++calls == 5) {
            throw std::runtime_error("actuator fault");
        }
        return hash_objective(g);
    };

    try {
        run_campaign(domain, kBaseline, settings, flaky);
        FAIL("expected CampaignAborted");
    } catch (const CampaignAborted& e) {
        CHECK(e.partial.iterations.size() == 4);
        CHECK(std::string(e.what()).find("actuator fault") != std::string::npos);
    }
}
