#pragma once

#include <optional>
#include <string>

#include "paristf/tangent.hpp"

namespace paristf {

// gamma_t = a * t^-kappa; kappa in (1/2, 1] gives an infinite sum with a
// finite sum of squares.
struct StepSchedule {
    double a = 1.0;
    double kappa = 0.6;
};

double step_size(const StepSchedule& schedule, long t);

struct RmlConfig {
    BackwardSamplerConfig backward;
    BackwardUpdater updater = BackwardUpdater::paris;
    StepSchedule schedule;
    double zeta3_floor = 1e-12;  // skip the parameter update below this predictive likelihood
    double clip_norm = 100.0;    // L2 cap on the step direction; <= 0 disables
    int threads = 1;
};

struct ZetaTriple {
    Vec z1;           // N^-1 sum grad g(xi, y)
    Vec z2;           // N^-1 sum (tau - tau_bar) g(xi, y)
    double z3 = 0.0;  // N^-1 sum g(xi, y)
};

struct ZetaResult {
    ZetaTriple triple;
    Vec zeta;  // (z1 + z2) / z3
};

// Particle estimate of the one-step predictor log-likelihood gradient from
// the time-(t+1) cloud and statistics. Throws DegenerateLikelihood when z3
// falls below the floor (the skip-update signal).
ZetaResult zeta_hat(const ParticleCloud& cloud, const BackwardStatistics& stats, const Observation& y,
                    const Model& model, const Vec& theta, double zeta3_floor = 0.0, int threads = 1);

// Componentwise clamp into the model's admissible box.
Vec project(const Model& model, Vec theta);

struct RmlDiagnostics {
    long skip_events = 0;
    long clip_events = 0;
    Vec last_zeta;
    double last_zeta3 = 0.0;
    double last_gamma = 0.0;
    bool last_skipped = false;
    bool last_clipped = false;
};

// Online RML state. The cloud is the unweighted predictor sample at time t;
// pending_obs is y_t, consumed by the next step (the complete-data score at
// time t needs it). theta is theta_t.
struct RmlState {
    Vec theta;
    ParticleCloud cloud;
    BackwardStatistics stats;
    Vec tau_bar;
    Observation pending_obs;
    uint64_t seed = 0;
    RmlDiagnostics diag;

    long time() const { return cloud.t; }
};

RmlState rml_init(const Model& model, const Vec& theta0, const Observation& y0, int N, uint64_t seed,
                  const RmlConfig& config);

// One Robbins-Monro step: advance cloud and statistics with theta_t (same
// recursion as tangent_step), estimate zeta from the new cloud and y_{t+1},
// then theta_{t+1} = project(theta_t + gamma_{t+1} clip(zeta)). A degenerate
// zeta^3 skips the parameter move; a collapsed cloud aborts the run.
void rml_step(RmlState& state, const Observation& y_next, const Model& model, const RmlConfig& config);

// JSON checkpoint with full state; (seed, t) pins the substream positions,
// so resumed runs continue bit-identically.
void save_checkpoint(const std::string& path, const RmlState& state);
RmlState load_checkpoint(const std::string& path);

}  // namespace paristf
