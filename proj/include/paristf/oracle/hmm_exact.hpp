#pragma once

#include <functional>

#include "paristf/models/hmm.hpp"

namespace paristf::oracle {

// Exact finite-state references, normalized at every step. Index convention:
// entry t of each sequence conditions on y_{0:t-1}, so entry 0 is the prior
// and processing y_{0:T} yields entries 0..T+1.

struct HmmExactState {
    Vec predictor;    // pi_t, length m
    Matrix tangent;   // d x m, d/dtheta_k pi_t(j)
    double loglik = 0.0;  // log l(y_{0:t-1})
};

// Generic normalized forward pass over per-step emission vectors; the
// finite-HMM and grid-discretized oracles share it.
std::vector<Vec> forward_pass(const Vec& chi, const Matrix& Q, const std::vector<Vec>& emissions,
                              double* loglik_out);

std::vector<HmmExactState> hmm_forward(const HmmModel& model, const Vec& theta,
                                       const std::vector<Observation>& ys);

// Exact tangent filters d pi_t / d theta via the differentiated normalized
// recursion; rows sum to zero. Also fills the exact one-step scores
// grad log l(y_t | y_{0:t-1}) when requested.
std::vector<HmmExactState> hmm_tangent_exact(const HmmModel& model, const Vec& theta,
                                             const std::vector<Observation>& ys,
                                             std::vector<Vec>* one_step_scores = nullptr);

// Increment evaluated between grid states, h~_t(i, j) -> d-vector.
using HmmPairFn = std::function<Vec(long t, int i, int j)>;

// Exact backward-statistic recursion T_{t+1}(j) = sum_i B_t(j,i) (T_t(i) +
// h~_t(i,j)); returns the predictor expectation sum_j pi_t(j) T_t(j) for
// t = 0..T+1 together with the final per-state statistics.
struct HmmSmoothedExact {
    std::vector<Vec> expectation;      // entry t: d-vector
    std::vector<Matrix> stats;         // entry t: m x d per-state statistics
    Matrix final_stats;                // m x d at the final time index
    std::vector<Vec> filters;          // entry t: exact filter given y_{0:t}
};

HmmSmoothedExact hmm_smoothed_exact(const HmmModel& model, const Vec& theta, const std::vector<Observation>& ys,
                                    const HmmPairFn& h, int dim);

// Exact tangent-filter action on a test function: sum_j tangent(k, j) f(j).
Vec hmm_tangent_apply(const HmmExactState& state, const std::function<double(int)>& f);

double hmm_loglik(const HmmModel& model, const Vec& theta, const std::vector<Observation>& ys);

}  // namespace paristf::oracle
