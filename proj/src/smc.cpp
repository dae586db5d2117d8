#include "paristf/smc.hpp"

#include <cmath>

#include "paristf/parallel.hpp"

namespace paristf {

CategoricalSampler::CategoricalSampler(std::span<const double> weights) {
    const int n = static_cast<int>(weights.size());
    if (n == 0) throw AllZeroWeights("categorical: empty weight vector");
    total_ = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw AllZeroWeights("categorical: weights must be finite and >= 0");
        total_ += w;
    }
    if (!(total_ > 0.0)) throw AllZeroWeights("categorical: all weights are zero");

    threshold_.assign(static_cast<size_t>(n), 0.0);
    alias_.assign(static_cast<size_t>(n), 0);
    std::vector<double> scaled(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) scaled[static_cast<size_t>(i)] = weights[static_cast<size_t>(i)] * n / total_;

    std::vector<int> small, large;
    small.reserve(static_cast<size_t>(n));
    large.reserve(static_cast<size_t>(n));
    for (int i = n - 1; i >= 0; --i) (scaled[static_cast<size_t>(i)] < 1.0 ? small : large).push_back(i);

    while (!small.empty() && !large.empty()) {
        const int s = small.back();
        small.pop_back();
        const int l = large.back();
        threshold_[static_cast<size_t>(s)] = scaled[static_cast<size_t>(s)];
        alias_[static_cast<size_t>(s)] = l;
        scaled[static_cast<size_t>(l)] -= 1.0 - scaled[static_cast<size_t>(s)];
        if (scaled[static_cast<size_t>(l)] < 1.0) {
            large.pop_back();
            small.push_back(l);
        }
    }
    for (int l : large) threshold_[static_cast<size_t>(l)] = 1.0;
    // leftovers in small are a rounding artifact of full columns, except a
    // zero-weight entry must still never be drawn
    int first_positive = 0;
    while (!(weights[static_cast<size_t>(first_positive)] > 0.0)) ++first_positive;
    for (int s : small) {
        if (weights[static_cast<size_t>(s)] > 0.0) {
            threshold_[static_cast<size_t>(s)] = 1.0;
        } else {
            threshold_[static_cast<size_t>(s)] = 0.0;
            alias_[static_cast<size_t>(s)] = first_positive;
        }
    }
}

std::vector<int> sample_categorical(const CategoricalSampler& sampler, Xoshiro256& rng, int count) {
    std::vector<int> out(static_cast<size_t>(count));
    for (auto& v : out) v = sampler.draw(rng);
    return out;
}

ParticleCloud init_cloud(const Model& model, const Vec& theta, int N, const RunRng& rng, int threads) {
    model.check_admissible(theta);
    if (N < 1) throw ConfigError("init_cloud: N must be >= 1");
    ParticleCloud c;
    c.t = 0;
    c.state_dim = model.state_dim();
    c.states.resize(static_cast<size_t>(N) * c.state_dim);
    parallel_for(N, threads, [&](int lo, int hi) {
        for (int i = lo; i < hi; ++i) {
            auto gen = rng.at(0, static_cast<uint64_t>(i), StreamTag::init);
            model.sample_initial(gen, c.state(i));
        }
    });
    return c;
}

void weight_cloud(ParticleCloud& cloud, const Observation& y, const Model& model, const Vec& theta, int threads) {
    model.check_admissible(theta);
    const int n = cloud.size();
    cloud.weights.assign(static_cast<size_t>(n), 0.0);
    parallel_for(n, threads, [&](int lo, int hi) {
        for (int i = lo; i < hi; ++i) {
            double w = model.emission_density(theta, cloud.t, cloud.state(i), y);
            if (!(w >= ParticleCloud::weight_floor)) w = 0.0;  // underflow floor; NaN lands here too
            cloud.weights[static_cast<size_t>(i)] = w;
        }
    });
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += cloud.weights[static_cast<size_t>(i)];
    cloud.weight_sum = sum;
    if (!(sum > 0.0)) {
        cloud.weights.clear();
        cloud.weight_sum = 0.0;
        throw Collapsed("weight_cloud: all particle weights vanished at t=" + std::to_string(cloud.t));
    }
}

ParticleCloud propagate(const ParticleCloud& cloud, const CategoricalSampler& sampler, const Model& model,
                        const Vec& theta, const RunRng& rng, int threads) {
    if (!cloud.weighted()) throw std::logic_error("propagate: cloud must be weighted");
    const int n = cloud.size();
    ParticleCloud next;
    next.t = cloud.t + 1;
    next.state_dim = cloud.state_dim;
    next.states.resize(cloud.states.size());
    next.ancestors.assign(static_cast<size_t>(n), 0);
    parallel_for(n, threads, [&](int lo, int hi) {
        for (int i = lo; i < hi; ++i) {
            auto sel = rng.at(static_cast<uint64_t>(next.t), static_cast<uint64_t>(i), StreamTag::select);
            const int a = sampler.draw(sel);
            next.ancestors[static_cast<size_t>(i)] = a;
            auto mut = rng.at(static_cast<uint64_t>(next.t), static_cast<uint64_t>(i), StreamTag::mutate);
            model.sample_transition(theta, cloud.t, cloud.state(a), mut, next.state(i));
        }
    });
    return next;
}

ParticleCloud propagate(const ParticleCloud& cloud, const Model& model, const Vec& theta, const RunRng& rng,
                        int threads) {
    if (!cloud.weighted() || !(cloud.weight_sum > 0.0)) throw Collapsed("propagate: cloud has no usable weights");
    CategoricalSampler sampler(cloud.weights);
    return propagate(cloud, sampler, model, theta, rng, threads);
}

}  // namespace paristf
