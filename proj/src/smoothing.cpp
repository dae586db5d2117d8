#include "paristf/smoothing.hpp"

#include <atomic>
#include <cmath>

#include "paristf/parallel.hpp"

namespace paristf {

namespace {

// Exact draw from Pr({w_l q(xi_l, child)}) with the normalisation computed
// on the spot; used as the accept-reject fallback.
int exact_backward_draw(const ParticleCloud& prev, const Model& model, const Vec& theta,
                        std::span<const double> child, Xoshiro256& rng) {
    const int n = prev.size();
    std::vector<double> bw(static_cast<size_t>(n));
    double total = 0.0;
    for (int l = 0; l < n; ++l) {
        const double v =
            prev.weights[static_cast<size_t>(l)] * model.transition_density(theta, prev.t, prev.state(l), child);
        bw[static_cast<size_t>(l)] = v;
        total += v;
    }
    if (!(total > 0.0))
        throw AllZeroBackwardWeights("backward_index: all backward weights vanished at t=" + std::to_string(prev.t));
    const double u = rng.uniform01() * total;
    double c = 0.0;
    int last_pos = 0;
    for (int l = 0; l < n; ++l) {
        if (bw[static_cast<size_t>(l)] > 0.0) last_pos = l;
        c += bw[static_cast<size_t>(l)];
        if (u < c) return l;
    }
    return last_pos;
}

int backward_index_bounded(const ParticleCloud& prev, const CategoricalSampler& sampler, const Model& model,
                           const Vec& theta, double bound, std::span<const double> child,
                           const BackwardSamplerConfig& config, Xoshiro256& rng, SmoothingDiag* diag) {
    if (sampler.size() == 1) {
        // single-atom backward law; one density check replaces the whole loop
        if (diag) {
            ++diag->trials;
            ++diag->draws;
        }
        if (!(model.transition_density(theta, prev.t, prev.state(0), child) > 0.0))
            throw AllZeroBackwardWeights("backward_index: all backward weights vanished at t=" +
                                         std::to_string(prev.t));
        return 0;
    }
    for (int trial = 0; trial < config.max_trials; ++trial) {
        const int cand = sampler.draw(rng);
        if (diag) ++diag->trials;
        const double q = model.transition_density(theta, prev.t, prev.state(cand), child);
        if (rng.uniform01() * bound < q) {
            if (diag) ++diag->draws;
            return cand;
        }
    }
    if (diag) {
        ++diag->fallbacks;
        ++diag->draws;
    }
    return exact_backward_draw(prev, model, theta, child, rng);
}

}  // namespace

int backward_index(const ParticleCloud& prev, const CategoricalSampler& sampler, const Model& model,
                   const Vec& theta, std::span<const double> child, const BackwardSamplerConfig& config,
                   Xoshiro256& rng, SmoothingDiag* diag) {
    return backward_index_bounded(prev, sampler, model, theta, model.density_bound(theta), child, config, rng,
                                  diag);
}

int backward_index(const ParticleCloud& prev, const Model& model, const Vec& theta, std::span<const double> child,
                   const BackwardSamplerConfig& config, Xoshiro256& rng) {
    if (!prev.weighted() || !(prev.weight_sum > 0.0))
        throw Collapsed("backward_index: previous cloud has no usable weights");
    CategoricalSampler sampler(prev.weights);
    return backward_index(prev, sampler, model, theta, child, config, rng, nullptr);
}

BackwardStatistics paris_update(const BackwardStatistics& stats, const ParticleCloud& prev,
                                const ParticleCloud& next, const PairGradFn& h, const Model& model,
                                const Vec& theta, const BackwardSamplerConfig& config, const RunRng& rng,
                                int threads, SmoothingDiag* diag) {
    const int n = next.size();
    const int d = stats.dim;
    if (stats.count != prev.size()) throw std::logic_error("paris_update: stats/cloud size mismatch");
    if (config.precision < 1) throw ConfigError("paris_update: precision must be >= 1");
    if (!prev.weighted() || !(prev.weight_sum > 0.0)) throw Collapsed("paris_update: unusable previous cloud");

    CategoricalSampler sampler(prev.weights);
    const double bound = model.density_bound(theta);
    BackwardStatistics out = BackwardStatistics::zeros(n, d, next.t);

    std::atomic<long> trials{0}, fallbacks{0}, draws{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};

    parallel_for(n, threads, [&](int lo, int hi) {
        SmoothingDiag local;
        std::vector<double> inc(static_cast<size_t>(d));
        try {
            for (int i = lo; i < hi; ++i) {
                if (failed.load(std::memory_order_relaxed)) break;
                auto gen = rng.at(static_cast<uint64_t>(next.t), static_cast<uint64_t>(i), StreamTag::backward);
                auto row = out.row(i);
                const auto child = next.state(i);
                for (int j = 0; j < config.precision; ++j) {
                    const int a =
                        backward_index_bounded(prev, sampler, model, theta, bound, child, config, gen, &local);
                    h(prev.state(a), child, inc);
                    const auto prev_row = stats.row(a);
                    for (int k = 0; k < d; ++k)
                        row[static_cast<size_t>(k)] += prev_row[static_cast<size_t>(k)] + inc[static_cast<size_t>(k)];
                }
                for (int k = 0; k < d; ++k) row[static_cast<size_t>(k)] /= config.precision;
            }
        } catch (...) {
            bool expected = false;
            if (failed.compare_exchange_strong(expected, true)) error = std::current_exception();
        }
        trials += local.trials;
        fallbacks += local.fallbacks;
        draws += local.draws;
    });
    if (error) std::rethrow_exception(error);
    if (diag) {
        diag->trials += trials.load();
        diag->fallbacks += fallbacks.load();
        diag->draws += draws.load();
    }
    return out;
}

BackwardStatistics ffbsm_update(const BackwardStatistics& stats, const ParticleCloud& prev,
                                const ParticleCloud& next, const PairGradFn& h, const Model& model,
                                const Vec& theta, int threads) {
    const int n = next.size();
    const int np = prev.size();
    const int d = stats.dim;
    if (stats.count != np) throw std::logic_error("ffbsm_update: stats/cloud size mismatch");
    if (!prev.weighted() || !(prev.weight_sum > 0.0)) throw Collapsed("ffbsm_update: unusable previous cloud");

    BackwardStatistics out = BackwardStatistics::zeros(n, d, next.t);
    std::exception_ptr error;
    std::atomic<bool> failed{false};

    parallel_for(n, threads, [&](int lo, int hi) {
        std::vector<double> inc(static_cast<size_t>(d));
        std::vector<double> acc(static_cast<size_t>(d));
        try {
            for (int i = lo; i < hi; ++i) {
                if (failed.load(std::memory_order_relaxed)) break;
                const auto child = next.state(i);
                double norm = 0.0;
                std::fill(acc.begin(), acc.end(), 0.0);
                for (int l = 0; l < np; ++l) {
                    const double bw = prev.weights[static_cast<size_t>(l)] *
                                      model.transition_density(theta, prev.t, prev.state(l), child);
                    if (!(bw > 0.0)) continue;
                    norm += bw;
                    h(prev.state(l), child, inc);
                    const auto prev_row = stats.row(l);
                    for (int k = 0; k < d; ++k)
                        acc[static_cast<size_t>(k)] +=
                            bw * (prev_row[static_cast<size_t>(k)] + inc[static_cast<size_t>(k)]);
                }
                if (!(norm > 0.0))
                    throw AllZeroBackwardWeights("ffbsm_update: all backward weights vanished at t=" +
                                                 std::to_string(prev.t));
                auto row = out.row(i);
                for (int k = 0; k < d; ++k) row[static_cast<size_t>(k)] = acc[static_cast<size_t>(k)] / norm;
            }
        } catch (...) {
            bool expected = false;
            if (failed.compare_exchange_strong(expected, true)) error = std::current_exception();
        }
    });
    if (error) std::rethrow_exception(error);
    return out;
}

Vec smoothed_estimate(const BackwardStatistics& stats) {
    if (stats.count == 0) throw std::logic_error("smoothed_estimate: empty statistics");
    Vec mean(static_cast<size_t>(stats.dim), 0.0);
    for (int i = 0; i < stats.count; ++i) {
        const auto row = stats.row(i);
        for (int k = 0; k < stats.dim; ++k) mean[static_cast<size_t>(k)] += row[static_cast<size_t>(k)];
    }
    for (auto& v : mean) v /= stats.count;
    return mean;
}

}  // namespace paristf
