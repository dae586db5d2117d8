#include "paristf/tangent.hpp"

namespace paristf {

TangentState tangent_init(const Model& model, const Vec& theta, int N, const RunRng& rng, int threads) {
    TangentState s;
    s.cloud = init_cloud(model, theta, N, rng, threads);
    s.stats = BackwardStatistics::zeros(N, model.param_dim(), 0);
    s.tau_bar.assign(static_cast<size_t>(model.param_dim()), 0.0);
    return s;
}

void tangent_step(TangentState& state, const Observation& y, const Model& model, const Vec& theta,
                  const TangentStepConfig& config, const RunRng& rng, TangentStepDiag* diag) {
    const long t = state.cloud.t;
    weight_cloud(state.cloud, y, model, theta, config.threads);
    if (diag) diag->weight_sum = state.cloud.weight_sum;

    CategoricalSampler sampler(state.cloud.weights);
    ParticleCloud next = propagate(state.cloud, sampler, model, theta, rng, config.threads);

    const PairGradFn score = [&](std::span<const double> x_from, std::span<const double> x_to,
                                 std::span<double> out) { model.score_increment(theta, t, x_from, x_to, y, out); };

    BackwardStatistics next_stats =
        config.updater == BackwardUpdater::paris
            ? paris_update(state.stats, state.cloud, next, score, model, theta, config.backward, rng,
                           config.threads, diag ? &diag->smoothing : nullptr)
            : ffbsm_update(state.stats, state.cloud, next, score, model, theta, config.threads);

    state.cloud = std::move(next);
    state.stats = std::move(next_stats);
    state.tau_bar = smoothed_estimate(state.stats);
}

}  // namespace paristf
