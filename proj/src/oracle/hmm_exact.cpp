#include "paristf/oracle/hmm_exact.hpp"

#include <cmath>

namespace paristf::oracle {

std::vector<Vec> forward_pass(const Vec& chi, const Matrix& Q, const std::vector<Vec>& emissions,
                              double* loglik_out) {
    const int m = static_cast<int>(chi.size());
    std::vector<Vec> predictors;
    predictors.reserve(emissions.size() + 1);
    predictors.push_back(chi);
    double loglik = 0.0;
    for (const auto& g : emissions) {
        const Vec& pi = predictors.back();
        double c = 0.0;
        for (int i = 0; i < m; ++i) c += pi[static_cast<size_t>(i)] * g[static_cast<size_t>(i)];
        if (!(c > 0.0)) throw ZeroLikelihood("forward_pass: predictive likelihood vanished");
        loglik += std::log(c);
        Vec next(static_cast<size_t>(m), 0.0);
        for (int i = 0; i < m; ++i) {
            const double fi = pi[static_cast<size_t>(i)] * g[static_cast<size_t>(i)] / c;  // filter weight
            for (int j = 0; j < m; ++j) next[static_cast<size_t>(j)] += fi * Q(i, j);
        }
        predictors.push_back(std::move(next));
    }
    if (loglik_out) *loglik_out = loglik;
    return predictors;
}

namespace {

Vec emission_column(const HmmModel::Tables& tb, const Observation& y) {
    const int m = tb.G.rows;
    const int s = std::get<int>(y);
    Vec g(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) g[static_cast<size_t>(i)] = tb.G(i, s);
    return g;
}

}  // namespace

std::vector<HmmExactState> hmm_forward(const HmmModel& model, const Vec& theta,
                                       const std::vector<Observation>& ys) {
    const auto tbp = model.tables_ptr(theta);
    const auto& tb = *tbp;
    std::vector<Vec> emissions;
    emissions.reserve(ys.size());
    for (const auto& y : ys) emissions.push_back(emission_column(tb, y));

    std::vector<HmmExactState> out;
    out.reserve(ys.size() + 1);
    const int m = model.spec().num_states;
    Vec pi = model.spec().chi;
    double loglik = 0.0;
    out.push_back({pi, Matrix(), loglik});
    for (const auto& g : emissions) {
        double c = 0.0;
        for (int i = 0; i < m; ++i) c += pi[static_cast<size_t>(i)] * g[static_cast<size_t>(i)];
        if (!(c > 0.0)) throw ZeroLikelihood("hmm_forward: predictive likelihood vanished");
        loglik += std::log(c);
        Vec next(static_cast<size_t>(m), 0.0);
        for (int i = 0; i < m; ++i) {
            const double fi = pi[static_cast<size_t>(i)] * g[static_cast<size_t>(i)] / c;
            for (int j = 0; j < m; ++j) next[static_cast<size_t>(j)] += fi * tb.Q(i, j);
        }
        pi = std::move(next);
        out.push_back({pi, Matrix(), loglik});
    }
    return out;
}

std::vector<HmmExactState> hmm_tangent_exact(const HmmModel& model, const Vec& theta,
                                             const std::vector<Observation>& ys,
                                             std::vector<Vec>* one_step_scores) {
    const auto tbp = model.tables_ptr(theta);
    const auto& tb = *tbp;
    const int m = model.spec().num_states;
    const int d = model.param_dim();

    std::vector<HmmExactState> out;
    out.reserve(ys.size() + 1);
    Vec pi = model.spec().chi;
    Matrix eta(d, m, 0.0);  // chi is parameter-free
    double loglik = 0.0;
    out.push_back({pi, eta, loglik});
    if (one_step_scores) one_step_scores->clear();

    for (const auto& y : ys) {
        const int s = std::get<int>(y);
        double c = 0.0;
        Vec dc(static_cast<size_t>(d), 0.0);
        for (int i = 0; i < m; ++i) {
            const double gi = tb.G(i, s);
            c += pi[static_cast<size_t>(i)] * gi;
            for (int k = 0; k < d; ++k)
                dc[static_cast<size_t>(k)] +=
                    eta(k, i) * gi + pi[static_cast<size_t>(i)] * tb.dG[static_cast<size_t>(k)](i, s);
        }
        if (!(c > 0.0)) throw ZeroLikelihood("hmm_tangent_exact: predictive likelihood vanished");
        loglik += std::log(c);
        if (one_step_scores) {
            Vec score(static_cast<size_t>(d));
            for (int k = 0; k < d; ++k) score[static_cast<size_t>(k)] = dc[static_cast<size_t>(k)] / c;
            one_step_scores->push_back(std::move(score));
        }

        Vec next(static_cast<size_t>(m), 0.0);
        Matrix dnum(d, m, 0.0);
        for (int i = 0; i < m; ++i) {
            const double gi = tb.G(i, s);
            const double w = pi[static_cast<size_t>(i)] * gi;
            for (int j = 0; j < m; ++j) {
                next[static_cast<size_t>(j)] += w * tb.Q(i, j);
                for (int k = 0; k < d; ++k)
                    dnum(k, j) += (eta(k, i) * gi + pi[static_cast<size_t>(i)] * tb.dG[static_cast<size_t>(k)](i, s)) *
                                      tb.Q(i, j) +
                                  w * tb.dQ[static_cast<size_t>(k)](i, j);
            }
        }
        Matrix eta_next(d, m, 0.0);
        for (int j = 0; j < m; ++j) {
            const double pij = next[static_cast<size_t>(j)] / c;
            for (int k = 0; k < d; ++k)
                eta_next(k, j) = (dnum(k, j) - pij * dc[static_cast<size_t>(k)]) / c;
            next[static_cast<size_t>(j)] = pij;
        }
        pi = std::move(next);
        eta = std::move(eta_next);
        out.push_back({pi, eta, loglik});
    }
    return out;
}

HmmSmoothedExact hmm_smoothed_exact(const HmmModel& model, const Vec& theta, const std::vector<Observation>& ys,
                                    const HmmPairFn& h, int dim) {
    const auto tbp = model.tables_ptr(theta);
    const auto& tb = *tbp;
    const int m = model.spec().num_states;

    HmmSmoothedExact out;
    Vec pi = model.spec().chi;
    Matrix T(m, dim, 0.0);

    auto expectation = [&](const Vec& predictor, const Matrix& stats) {
        Vec e(static_cast<size_t>(dim), 0.0);
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < dim; ++k) e[static_cast<size_t>(k)] += predictor[static_cast<size_t>(j)] * stats(j, k);
        return e;
    };

    out.expectation.push_back(expectation(pi, T));
    out.stats.push_back(T);
    long t = 0;
    for (const auto& y : ys) {
        const int s = std::get<int>(y);
        double c = 0.0;
        Vec filter(static_cast<size_t>(m));
        for (int i = 0; i < m; ++i) {
            filter[static_cast<size_t>(i)] = pi[static_cast<size_t>(i)] * tb.G(i, s);
            c += filter[static_cast<size_t>(i)];
        }
        if (!(c > 0.0)) throw ZeroLikelihood("hmm_smoothed_exact: predictive likelihood vanished");
        for (auto& f : filter) f /= c;
        out.filters.push_back(filter);

        Matrix T_next(m, dim, 0.0);
        for (int j = 0; j < m; ++j) {
            double norm = 0.0;
            for (int i = 0; i < m; ++i) norm += filter[static_cast<size_t>(i)] * tb.Q(i, j);
            for (int i = 0; i < m; ++i) {
                const double b = filter[static_cast<size_t>(i)] * tb.Q(i, j) / norm;
                const Vec inc = h(t, i, j);
                for (int k = 0; k < dim; ++k) T_next(j, k) += b * (T(i, k) + inc[static_cast<size_t>(k)]);
            }
        }
        Vec pi_next(static_cast<size_t>(m), 0.0);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) pi_next[static_cast<size_t>(j)] += filter[static_cast<size_t>(i)] * tb.Q(i, j);

        pi = std::move(pi_next);
        T = std::move(T_next);
        out.expectation.push_back(expectation(pi, T));
        out.stats.push_back(T);
        ++t;
    }
    out.final_stats = T;
    return out;
}

Vec hmm_tangent_apply(const HmmExactState& state, const std::function<double(int)>& f) {
    const int d = state.tangent.rows;
    const int m = static_cast<int>(state.predictor.size());
    Vec out(static_cast<size_t>(d), 0.0);
    for (int k = 0; k < d; ++k)
        for (int j = 0; j < m; ++j) out[static_cast<size_t>(k)] += state.tangent(k, j) * f(j);
    return out;
}

double hmm_loglik(const HmmModel& model, const Vec& theta, const std::vector<Observation>& ys) {
    auto states = hmm_forward(model, theta, ys);
    return states.back().loglik;
}

}  // namespace paristf::oracle
