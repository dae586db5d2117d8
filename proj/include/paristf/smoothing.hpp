#pragma once

#include <functional>

#include "paristf/smc.hpp"

namespace paristf {

// Per-particle backward statistics tau_t^i, one d-vector per particle,
// approximating the conditional expectation of the accumulated additive
// functional given the particle's position. All zero at t = 0.
struct BackwardStatistics {
    long t = 0;
    int dim = 0;
    int count = 0;
    std::vector<double> values;  // count x dim, row-major

    static BackwardStatistics zeros(int count, int dim, long t = 0) {
        BackwardStatistics s;
        s.t = t;
        s.dim = dim;
        s.count = count;
        s.values.assign(static_cast<size_t>(count) * dim, 0.0);
        return s;
    }

    std::span<double> row(int i) {
        return {values.data() + static_cast<size_t>(i) * dim, static_cast<size_t>(dim)};
    }
    std::span<const double> row(int i) const {
        return {values.data() + static_cast<size_t>(i) * dim, static_cast<size_t>(dim)};
    }
};

struct BackwardSamplerConfig {
    int precision = 2;    // backward draws per particle; >= 2 for stable long runs
    int max_trials = 100; // accept-reject attempts before the exact fallback
};

// Increment evaluator h~_t(x_t, x_{t+1}) writing a d-vector.
using PairGradFn =
    std::function<void(std::span<const double> x_from, std::span<const double> x_to, std::span<double> out)>;

struct SmoothingDiag {
    long trials = 0;     // accept-reject candidate draws
    long fallbacks = 0;  // children that hit the exact-sampling fallback
    long draws = 0;      // backward indices produced
};

// One index from Pr({w_t^l q(xi_t^l, child)}) by accept-reject against the
// weight sampler, with an exact O(N) categorical fallback after max_trials
// rejections; both branches target the same law. `sampler` must be built
// over prev.weights.
int backward_index(const ParticleCloud& prev, const CategoricalSampler& sampler, const Model& model,
                   const Vec& theta, std::span<const double> child, const BackwardSamplerConfig& config,
                   Xoshiro256& rng, SmoothingDiag* diag = nullptr);

// Convenience overload building the weight sampler per call.
int backward_index(const ParticleCloud& prev, const Model& model, const Vec& theta, std::span<const double> child,
                   const BackwardSamplerConfig& config, Xoshiro256& rng);

// PaRIS update: tau_{t+1}^i = mean over precision draws J of
// tau_t^J + h~(xi_t^J, xi_{t+1}^i). O(N * precision) expected cost.
BackwardStatistics paris_update(const BackwardStatistics& stats, const ParticleCloud& prev,
                                const ParticleCloud& next, const PairGradFn& h, const Model& model,
                                const Vec& theta, const BackwardSamplerConfig& config, const RunRng& rng,
                                int threads = 1, SmoothingDiag* diag = nullptr);

// Forward-only FFBSm update: the exact N-term weighted sum, the
// Rao-Blackwellised counterpart of paris_update. O(N^2), deterministic.
BackwardStatistics ffbsm_update(const BackwardStatistics& stats, const ParticleCloud& prev,
                                const ParticleCloud& next, const PairGradFn& h, const Model& model,
                                const Vec& theta, int threads = 1);

// N^-1 sum of the statistics; estimates the smoothed additive functional
// under the time-t predictor.
Vec smoothed_estimate(const BackwardStatistics& stats);

}  // namespace paristf
