#include <doctest.h>

#include <cmath>
#include <numbers>

#include "paristf/experiment.hpp"
#include "paristf/oracle/hmm_exact.hpp"
#include "paristf/oracle/kalman.hpp"
#include "paristf/simulate.hpp"
#include "paristf/smc.hpp"
#include "support.hpp"

using namespace paristf;

namespace {

HmmSpec point_mass_chi_spec() {
    HmmSpec spec = three_state_mixing_spec();
    spec.chi = {0.0, 1.0, 0.0};
    return spec;
}

}  // namespace

TEST_CASE("init_cloud basics") {
    SUBCASE("single particle") {
        SvModel sv(SvSpec{});
        const auto c = init_cloud(sv, sv.nominal_theta(), 1, RunRng{4});
        CHECK(c.size() == 1);
        CHECK_FALSE(c.weighted());
    }
    SUBCASE("point-mass initial law gives identical particles") {
        HmmModel hmm(point_mass_chi_spec());
        const auto c = init_cloud(hmm, {0.5}, 200, RunRng{4});
        for (int i = 0; i < c.size(); ++i) CHECK(c.state(i)[0] == 1.0);
    }
    SUBCASE("stationary lgssm sample mean is near zero") {
        LgssmModel lg(LgssmSpec{0.7, 1.0, 1.0, true, false});
        const int n = 100000;
        const auto c = init_cloud(lg, lg.nominal_theta(), n, RunRng{11});
        std::vector<double> xs(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) xs[static_cast<size_t>(i)] = c.state(i)[0];
        CHECK(std::abs(testutil::mean(xs)) < 3.0 * testutil::std_error(xs));
        // variance should match sigma^2 / (1 - phi^2)
        CHECK(testutil::variance(xs) == doctest::Approx(1.0 / 0.51).epsilon(0.05));
    }
}

TEST_CASE("weight_cloud values") {
    SUBCASE("hmm weights are emission lookups") {
        HmmModel hmm(three_state_mixing_spec());
        const Vec th{0.5};
        auto c = init_cloud(hmm, th, 50, RunRng{7});
        weight_cloud(c, Observation{2}, hmm, th);
        const auto& tb = hmm.tables(th);
        for (int i = 0; i < c.size(); ++i)
            CHECK(c.weights[static_cast<size_t>(i)] == tb.G(static_cast<int>(c.state(i)[0]), 2));
    }
    SUBCASE("identical particles get identical weights") {
        HmmModel hmm(point_mass_chi_spec());
        auto c = init_cloud(hmm, {0.5}, 64, RunRng{7});
        weight_cloud(c, Observation{1}, hmm, {0.5});
        for (int i = 1; i < c.size(); ++i) CHECK(c.weights[static_cast<size_t>(i)] == c.weights[0]);
    }
    SUBCASE("sv weights equal the Gaussian density evaluated per particle") {
        SvModel sv(SvSpec{0.8, 0.1, 1.0});
        const Vec th = sv.nominal_theta();
        auto c = init_cloud(sv, th, 500, RunRng{3});
        const double y = 0.37;
        weight_cloud(c, Observation{y}, sv, th);
        for (int i = 0; i < c.size(); ++i) {
            const double v = th[2] * std::exp(c.state(i)[0]);
            const double direct = std::exp(-y * y / (2.0 * v)) / std::sqrt(2.0 * std::numbers::pi * v);
            CHECK(c.weights[static_cast<size_t>(i)] == direct);  // bitwise
        }
    }
    SUBCASE("all-zero weights collapse") {
        SvModel sv(SvSpec{0.8, 0.1, 1.0});
        auto c = init_cloud(sv, sv.nominal_theta(), 32, RunRng{3});
        CHECK_THROWS_AS(weight_cloud(c, Observation{1e200}, sv, sv.nominal_theta()), Collapsed);
    }
}

TEST_CASE("sample_categorical laws") {
    SUBCASE("degenerate weights always yield the support point") {
        const Vec w{1.0, 0.0, 0.0};
        CategoricalSampler s(w);
        Xoshiro256 gen(9);
        for (int i = 0; i < 5000; ++i) CHECK(s.draw(gen) == 0);
    }
    SUBCASE("fair coin frequency") {
        const Vec w{1.0, 1.0};
        CategoricalSampler s(w);
        Xoshiro256 gen(10);
        const auto idx = sample_categorical(s, gen, 100000);
        long zeros = 0;
        for (int v : idx) zeros += v == 0 ? 1 : 0;
        const double freq = static_cast<double>(zeros) / static_cast<double>(idx.size());
        CHECK(freq > 0.49);
        CHECK(freq < 0.51);
    }
    SUBCASE("proportional weights pass a goodness-of-fit test") {
        const Vec w{1.0, 2.0, 3.0, 4.0};
        CategoricalSampler s(w);
        Xoshiro256 gen(12);
        std::vector<long> counts(4, 0);
        for (int i = 0; i < 100000; ++i) ++counts[static_cast<size_t>(s.draw(gen))];
        CHECK(testutil::chi2_gof_pvalue(counts, {0.1, 0.2, 0.3, 0.4}) > 0.001);
    }
    SUBCASE("all-zero weights are rejected") {
        const Vec w{0.0, 0.0};
        CHECK_THROWS_AS(CategoricalSampler{w}, AllZeroWeights);
    }
}

TEST_CASE("propagate") {
    SUBCASE("single particle is its own ancestor") {
        SvModel sv(SvSpec{});
        auto c = init_cloud(sv, sv.nominal_theta(), 1, RunRng{5});
        weight_cloud(c, Observation{0.1}, sv, sv.nominal_theta());
        const auto next = propagate(c, sv, sv.nominal_theta(), RunRng{5});
        CHECK(next.ancestors == std::vector<int>{0});
        CHECK(next.t == 1);
    }
    SUBCASE("near-deterministic kernel copies the ancestor state") {
        HmmSpec spec = three_state_mixing_spec();
        spec.par.eval = [](const Vec&, Matrix& Q, Matrix& G) {
            const double eps = 1e-9;
            Q = Matrix(3, 3, eps);
            for (int i = 0; i < 3; ++i) Q(i, i) = 1.0 - 2.0 * eps;
            G = Matrix(3, 3, 1.0 / 3);
        };
        HmmModel hmm(spec);
        auto c = init_cloud(hmm, {0.5}, 1000, RunRng{6});
        weight_cloud(c, Observation{0}, hmm, {0.5});
        const auto next = propagate(c, hmm, {0.5}, RunRng{6});
        for (int i = 0; i < next.size(); ++i)
            CHECK(next.state(i)[0] == c.state(next.ancestors[static_cast<size_t>(i)])[0]);
    }
    SUBCASE("one-step predictor mean matches the Kalman oracle") {
        LgssmModel lg(LgssmSpec{0.7, 1.0, 0.5, true, false});
        const Vec th = lg.nominal_theta();
        const double y0 = 0.8;
        const auto kalman = oracle::kalman_filter(lg, th, {Observation{y0}});
        auto c = init_cloud(lg, th, 100000, RunRng{31});
        weight_cloud(c, Observation{y0}, lg, th);
        const auto next = propagate(c, lg, th, RunRng{31});
        std::vector<double> xs(static_cast<size_t>(next.size()));
        for (int i = 0; i < next.size(); ++i) xs[static_cast<size_t>(i)] = next.state(i)[0];
        CHECK(std::abs(testutil::mean(xs) - kalman[1].mean) < 3.0 * testutil::std_error(xs));
    }
    SUBCASE("propagate preserves the particle count") {
        SvModel sv(SvSpec{});
        auto c = init_cloud(sv, sv.nominal_theta(), 77, RunRng{5});
        weight_cloud(c, Observation{0.1}, sv, sv.nominal_theta());
        CHECK(propagate(c, sv, sv.nominal_theta(), RunRng{5}).size() == 77);
    }
}

TEST_CASE("estimate") {
    SvModel sv(SvSpec{});
    auto c = init_cloud(sv, sv.nominal_theta(), 100, RunRng{2});
    const auto one = [](std::span<const double>) { return 1.0; };
    CHECK(estimate(c, one, EstimateMode::predictor) == 1.0);
    weight_cloud(c, Observation{0.3}, sv, sv.nominal_theta());
    CHECK(estimate(c, one, EstimateMode::filter) == 1.0);  // exact normalization

    SUBCASE("single particle returns the plain function value") {
        auto c1 = init_cloud(sv, sv.nominal_theta(), 1, RunRng{8});
        const auto sq = [](std::span<const double> x) { return x[0] * x[0]; };
        const double expect = c1.state(0)[0] * c1.state(0)[0];
        CHECK(estimate(c1, sq, EstimateMode::predictor) == expect);
        weight_cloud(c1, Observation{0.0}, sv, sv.nominal_theta());
        CHECK(estimate(c1, sq, EstimateMode::filter) == expect);
    }

    SUBCASE("filter mode requires weights") {
        auto c2 = init_cloud(sv, sv.nominal_theta(), 10, RunRng{8});
        CHECK_THROWS_AS((void)estimate(c2, one, EstimateMode::filter), std::logic_error);
    }

    SUBCASE("hmm predictor indicator matches the exact forward pass") {
        HmmModel hmm(three_state_mixing_spec());
        const Vec th{0.5};
        Xoshiro256 gen(40);
        const auto traj = simulate(hmm, th, 10, gen);
        const auto exact = oracle::hmm_forward(hmm, th, traj.observations);
        const int n = 20000;
        auto cloud = init_cloud(hmm, th, n, RunRng{41});
        for (long t = 0; t < 10; ++t) {
            weight_cloud(cloud, traj.observations[static_cast<size_t>(t)], hmm, th);
            cloud = propagate(cloud, hmm, th, RunRng{41});
        }
        const auto ind0 = [](std::span<const double> x) { return x[0] == 0.0 ? 1.0 : 0.0; };
        const double est = estimate(cloud, ind0, EstimateMode::predictor);
        const double truth = exact[10].predictor[0];
        const double se = std::sqrt(truth * (1.0 - truth) / n);
        CHECK(std::abs(est - truth) < 3.0 * se);
    }
}

TEST_CASE("filter pass is bit-reproducible across runs and thread counts") {
    SvModel sv(SvSpec{});
    const Vec th = sv.nominal_theta();
    Xoshiro256 gen(55);
    const auto traj = simulate(sv, th, 30, gen);

    auto run_filter = [&](int threads) {
        auto c = init_cloud(sv, th, 300, RunRng{99}, threads);
        for (long t = 0; t < 30; ++t) {
            weight_cloud(c, traj.observations[static_cast<size_t>(t)], sv, th, threads);
            c = propagate(c, sv, th, RunRng{99}, threads);
        }
        return c;
    };
    const auto a = run_filter(1);
    const auto b = run_filter(1);
    const auto c4 = run_filter(4);
    CHECK(a.states == b.states);
    CHECK(a.states == c4.states);
    CHECK(a.ancestors == c4.ancestors);
}

TEST_CASE("hmm predictor error scales as one over root N") {
    HmmModel hmm(three_state_mixing_spec());
    const Vec th{0.5};
    Xoshiro256 gen(60);
    const long T = 15;
    const auto traj = simulate(hmm, th, T, gen);
    const auto exact = oracle::hmm_forward(hmm, th, traj.observations);
    const double truth = exact[static_cast<size_t>(T)].predictor[1];
    const auto ind1 = [](std::span<const double> x) { return x[0] == 1.0 ? 1.0 : 0.0; };

    auto rmse_for = [&](int n) {
        std::vector<double> est;
        for (int rep = 0; rep < 200; ++rep) {
            const RunRng rng{1000 + static_cast<uint64_t>(rep)};
            auto c = init_cloud(hmm, th, n, rng);
            for (long t = 0; t < T; ++t) {
                weight_cloud(c, traj.observations[static_cast<size_t>(t)], hmm, th);
                c = propagate(c, hmm, th, rng);
            }
            est.push_back(estimate(c, ind1, EstimateMode::predictor));
        }
        return testutil::rmse(est, truth);
    };
    const double ratio = rmse_for(250) / rmse_for(1000);
    CHECK(ratio > 1.6);
    CHECK(ratio < 2.5);
}
