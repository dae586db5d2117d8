#include <doctest.h>

#include <cmath>

#include "paristf/experiment.hpp"
#include "paristf/oracle/finite_diff.hpp"
#include "paristf/oracle/hmm_exact.hpp"
#include "paristf/oracle/kalman.hpp"
#include "paristf/simulate.hpp"
#include "support.hpp"

using namespace paristf;

namespace {

HmmSpec fixed_hmm(int m, int symbols, Matrix Q, Matrix G, Vec chi) {
    HmmSpec spec;
    spec.num_states = m;
    spec.num_symbols = symbols;
    spec.chi = std::move(chi);
    spec.par.dim = 0;
    spec.par.eval = [Q = std::move(Q), G = std::move(G)](const Vec&, Matrix& q, Matrix& g) {
        q = Q;
        g = G;
    };
    spec.par.deriv = [](const Vec&, int, Matrix&, Matrix&) {};
    return spec;
}

HmmSpec handworked_two_state() {
    Matrix Q(2, 2);
    Q(0, 0) = 0.9;
    Q(0, 1) = 0.1;
    Q(1, 0) = 0.2;
    Q(1, 1) = 0.8;
    Matrix G(2, 2);
    G(0, 0) = 0.7;
    G(0, 1) = 0.4;
    G(1, 0) = 0.3;
    G(1, 1) = 0.6;
    return fixed_hmm(2, 2, Q, G, {0.5, 0.5});
}

}  // namespace

TEST_CASE("forward pass on a single-state chain reduces to the emission log product") {
    Matrix Q(1, 1);
    Q(0, 0) = 1.0;
    Matrix G(1, 2);
    G(0, 0) = 0.3;
    G(0, 1) = 0.7;
    HmmModel hmm(fixed_hmm(1, 2, Q, G, {1.0}));
    const std::vector<Observation> ys = {0, 1, 1, 0, 1};
    const auto states = oracle::hmm_forward(hmm, {}, ys);
    double expect = 0.0;
    for (const auto& y : ys) expect += std::log(G(0, std::get<int>(y)));
    CHECK(states.back().loglik == doctest::Approx(expect).epsilon(1e-14));
    for (const auto& s : states) CHECK(s.predictor[0] == 1.0);
}

TEST_CASE("uniform chain keeps a uniform predictor") {
    Matrix Q(3, 3, 1.0 / 3);
    Matrix G(3, 2, 0.5);
    HmmModel hmm(fixed_hmm(3, 2, Q, G, {1.0 / 3, 1.0 / 3, 1.0 / 3}));
    const std::vector<Observation> ys = {0, 1, 0, 0, 1, 1};
    const auto states = oracle::hmm_forward(hmm, {}, ys);
    for (const auto& s : states)
        for (double p : s.predictor) CHECK(p == doctest::Approx(1.0 / 3).epsilon(1e-14));
}

TEST_CASE("handworked two-state predictors pinned") {
    HmmModel hmm(handworked_two_state());
    const std::vector<Observation> ys = {0, 1};
    const auto states = oracle::hmm_forward(hmm, {}, ys);
    REQUIRE(states.size() == 3);
    // hand-executed recursion: pi_1 = (0.69, 0.31), pi_2 = (34/55, 21/55)
    CHECK(states[1].predictor[0] == doctest::Approx(0.69).epsilon(1e-14));
    CHECK(states[1].predictor[1] == doctest::Approx(0.31).epsilon(1e-14));
    CHECK(states[2].predictor[0] == doctest::Approx(0.6181818181818182).epsilon(1e-13));
    CHECK(states[2].predictor[1] == doctest::Approx(0.38181818181818183).epsilon(1e-13));
    CHECK(states[2].loglik == doctest::Approx(-1.4653375684603436).epsilon(1e-13));
}

TEST_CASE("predictors stay on the simplex") {
    HmmModel hmm(three_state_mixing_spec());
    Xoshiro256 gen(3);
    const auto traj = simulate(hmm, {0.5}, 200, gen);
    const auto states = oracle::hmm_forward(hmm, {0.5}, traj.observations);
    for (const auto& s : states) {
        double sum = 0.0;
        for (double p : s.predictor) {
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
            sum += p;
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
}

TEST_CASE("exact tangent of a parameter-free chain vanishes") {
    HmmModel hmm(handworked_two_state());
    const std::vector<Observation> ys = {0, 1, 1};
    const auto states = oracle::hmm_tangent_exact(hmm, {}, ys);
    for (const auto& s : states) CHECK(s.tangent.a.empty());
}

TEST_CASE("exact tangent is zero at t=0 and rows sum to zero afterwards") {
    HmmModel hmm(three_state_mixing_emission_spec());
    Xoshiro256 gen(5);
    const Vec th{0.45, 0.65};
    const auto traj = simulate(hmm, th, 60, gen);
    const auto states = oracle::hmm_tangent_exact(hmm, th, traj.observations);
    for (int j = 0; j < 3; ++j) {
        CHECK(states[0].tangent(0, j) == 0.0);
        CHECK(states[0].tangent(1, j) == 0.0);
    }
    for (const auto& s : states)
        for (int k = 0; k < 2; ++k) {
            double rs = 0.0;
            for (int j = 0; j < 3; ++j) rs += s.tangent(k, j);
            CHECK(std::abs(rs) < 1e-10);
        }
}

TEST_CASE("exact tangent matches finite differences of the forward pass") {
    HmmModel hmm(three_state_mixing_emission_spec());
    Xoshiro256 gen(8);
    const Vec th{0.5, 0.6};
    const auto traj = simulate(hmm, th, 40, gen);
    const auto states = oracle::hmm_tangent_exact(hmm, th, traj.observations);
    const Matrix fd = oracle::finite_diff_vec(
        [&](const Vec& p) { return oracle::hmm_forward(hmm, p, traj.observations).back().predictor; }, th, 1e-6);
    for (int k = 0; k < 2; ++k)
        for (int j = 0; j < 3; ++j) CHECK(std::abs(states.back().tangent(k, j) - fd(k, j)) < 1e-8);
}

TEST_CASE("smoothed recursion with a zero increment stays zero") {
    HmmModel hmm(three_state_mixing_spec());
    Xoshiro256 gen(4);
    const auto traj = simulate(hmm, {0.5}, 30, gen);
    const auto sm = oracle::hmm_smoothed_exact(
        hmm, {0.5}, traj.observations, [](long, int, int) { return Vec{0.0}; }, 1);
    for (const auto& e : sm.expectation) CHECK(e[0] == 0.0);
}

TEST_CASE("one-step smoothed expectation equals a brute-force double loop") {
    HmmModel hmm(handworked_two_state());
    const auto& tb = hmm.tables({});
    const std::vector<Observation> ys = {1};
    auto h = [](long, int i, int j) { return Vec{0.3 * i - 0.7 * j + 0.1}; };
    const auto sm = oracle::hmm_smoothed_exact(hmm, {}, ys, h, 1);

    // independent evaluation through the joint posterior of (x0, x1) given y0
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const double w = 0.5 * tb.G(i, 1) * tb.Q(i, j);
            num += w * h(0, i, j)[0];
            den += w;
        }
    CHECK(sm.expectation[1][0] == doctest::Approx(num / den).epsilon(1e-14));
}

TEST_CASE("smoothed score statistics reproduce the exact tangent filter") {
    HmmModel hmm(three_state_mixing_spec());
    Xoshiro256 gen(21);
    const Vec th{0.55};
    const auto traj = simulate(hmm, th, 20, gen);
    const auto& ys = traj.observations;

    const auto h = [&](long t, int i, int j) {
        Vec out(1);
        Vec xi{static_cast<double>(i)}, xj{static_cast<double>(j)};
        hmm.score_increment(th, t, xi, xj, ys[static_cast<size_t>(t)], out);
        return out;
    };
    const auto sm = oracle::hmm_smoothed_exact(hmm, th, ys, h, 1);
    const auto tangents = oracle::hmm_tangent_exact(hmm, th, ys);

    // eta_t f = sum_j pi_t(j) (T_t(j) - pi_t T_t) f(j) for three test functions
    const auto& pi = tangents.back().predictor;
    const auto& T_final = sm.final_stats;
    double tbar = 0.0;
    for (int j = 0; j < 3; ++j) tbar += pi[static_cast<size_t>(j)] * T_final(j, 0);
    for (int fsel = 0; fsel < 3; ++fsel) {
        auto f = [&](int j) { return fsel == 2 ? static_cast<double>(j) : (j == fsel ? 1.0 : 0.0); };
        double cov = 0.0;
        for (int j = 0; j < 3; ++j) cov += pi[static_cast<size_t>(j)] * (T_final(j, 0) - tbar) * f(j);
        const Vec eta = oracle::hmm_tangent_apply(tangents.back(), f);
        CHECK(std::abs(cov - eta[0]) < 1e-8);
    }
}

TEST_CASE("kalman trivial regimes") {
    SUBCASE("enormous observation noise leaves the prior dynamics") {
        oracle::KalmanSpec spec{0.7, 0.5, 1e12, 0.0, 1.0};
        std::vector<double> ys(20, 3.0);
        const auto states = oracle::kalman_filter(spec, ys);
        double m = 0.0, p = 1.0;
        for (size_t t = 1; t < states.size(); ++t) {
            m = spec.phi * m;
            p = spec.phi * spec.phi * p + spec.state_var;
            CHECK(std::abs(states[t].mean - m) < 1e-3);
            CHECK(std::abs(states[t].var - p) < 1e-3);
        }
    }
    SUBCASE("phi = 0 pins the predictor at the noise law") {
        oracle::KalmanSpec spec{0.0, 0.5, 0.2, 0.0, 0.9};
        std::vector<double> ys = {1.0, -2.0, 0.3, 0.7};
        const auto states = oracle::kalman_filter(spec, ys);
        for (size_t t = 1; t < states.size(); ++t) {
            CHECK(states[t].mean == 0.0);
            CHECK(states[t].var == doctest::Approx(0.5).epsilon(1e-14));
        }
    }
}

TEST_CASE("kalman five-step handworked values pinned") {
    oracle::KalmanSpec spec{0.5, 0.3, 0.2, 0.0, 0.4};
    const std::vector<double> ys = {0.5, -0.3, 0.8, 0.1, -0.6};
    const auto states = oracle::kalman_filter(spec, ys);
    REQUIRE(states.size() == 6);
    const double means[5] = {0.16666666666666666, -0.062500000000000014, 0.23764705882352943,
                             0.075913621262458486, -0.17275096424476177};
    const double vars[5] = {0.33333333333333331, 0.33124999999999999, 0.33117647058823529,
                            0.33117386489479511, 0.33117377254247887};
    const double lls[5] = {-0.87185905465501068, -1.680659924815163, -2.9834842374716102,
                           -3.6039269511138432, -4.6365793260393975};
    for (int t = 0; t < 5; ++t) {
        CHECK(states[static_cast<size_t>(t + 1)].mean == doctest::Approx(means[t]).epsilon(1e-14));
        CHECK(states[static_cast<size_t>(t + 1)].var == doctest::Approx(vars[t]).epsilon(1e-14));
        CHECK(states[static_cast<size_t>(t + 1)].loglik == doctest::Approx(lls[t]).epsilon(1e-13));
    }
}

TEST_CASE("finite differences: linear and quadratic closed forms") {
    const Vec th{1.0, 2.0};
    const Vec lin = oracle::finite_diff([](const Vec& p) { return 3.0 * p[0] - 5.0 * p[1] + 1.0; }, th);
    CHECK(lin[0] == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(lin[1] == doctest::Approx(-5.0).epsilon(1e-10));
    const Vec quad = oracle::finite_diff([](const Vec& p) { return p[0] * p[0] + p[1] * p[1]; }, th);
    CHECK(std::abs(quad[0] - 2.0) < 1e-9);
    CHECK(std::abs(quad[1] - 4.0) < 1e-9);
}

TEST_CASE("finite differences of the hmm log-likelihood match the exact score") {
    HmmModel hmm(three_state_mixing_emission_spec());
    Xoshiro256 gen(13);
    const Vec th{0.5, 0.55};
    const auto traj = simulate(hmm, th, 50, gen);
    std::vector<Vec> scores;
    oracle::hmm_tangent_exact(hmm, th, traj.observations, &scores);
    Vec total(2, 0.0);
    for (const auto& s : scores)
        for (int k = 0; k < 2; ++k) total[static_cast<size_t>(k)] += s[static_cast<size_t>(k)];
    const Vec fd =
        oracle::finite_diff([&](const Vec& p) { return oracle::hmm_loglik(hmm, p, traj.observations); }, th);
    for (int k = 0; k < 2; ++k) CHECK(std::abs(total[static_cast<size_t>(k)] - fd[static_cast<size_t>(k)]) < 1e-6);
}

TEST_CASE("oracle self-check suite passes (includes the grid cross-oracle)") {
    CHECK(oracle_check(false) == 0);
}
