#pragma once

#include "paristf/smoothing.hpp"

namespace paristf {

enum class BackwardUpdater { paris, ffbsm };

// Particle tangent-filter state: an unweighted predictor sample, its
// backward statistics, and their mean. tangent_measure reads the centered
// atoms (tau^i - tau_bar) against a test function.
struct TangentState {
    ParticleCloud cloud;
    BackwardStatistics stats;
    Vec tau_bar;

    long time() const { return cloud.t; }
};

struct TangentStepConfig {
    BackwardSamplerConfig backward;
    BackwardUpdater updater = BackwardUpdater::paris;
    int threads = 1;
};

struct TangentStepDiag {
    SmoothingDiag smoothing;
    double weight_sum = 0.0;
};

TangentState tangent_init(const Model& model, const Vec& theta, int N, const RunRng& rng, int threads = 1);

// One fused step: weight with g(., y_t), multinomial selection, mutation,
// backward update with the complete-data score increment, new mean. Consumes
// the observation of the state's current time index.
void tangent_step(TangentState& state, const Observation& y, const Model& model, const Vec& theta,
                  const TangentStepConfig& config, const RunRng& rng, TangentStepDiag* diag = nullptr);

// Signed-measure action: N^-1 sum (tau^i - tau_bar) f(xi^i); exactly zero
// for constant test functions.
template <typename F>
Vec tangent_measure(const TangentState& state, F&& f) {
    const int n = state.cloud.size();
    const int d = state.stats.dim;
    Vec acc(static_cast<size_t>(d), 0.0);
    for (int i = 0; i < n; ++i) {
        const double fv = f(state.cloud.state(i));
        const auto row = state.stats.row(i);
        for (int k = 0; k < d; ++k)
            acc[static_cast<size_t>(k)] += (row[static_cast<size_t>(k)] - state.tau_bar[static_cast<size_t>(k)]) * fv;
    }
    for (auto& v : acc) v /= n;
    return acc;
}

}  // namespace paristf
