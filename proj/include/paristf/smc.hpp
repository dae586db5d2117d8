#pragma once

#include "paristf/model.hpp"
#include "paristf/rng.hpp"

namespace paristf {

// Weighted particle sample at one time index. Weights are in natural scale
// (w_i = g(xi_i, y)); they are absent until weight_cloud runs. Values below
// the underflow floor count as zero; only an all-zero sample collapses.
struct ParticleCloud {
    long t = 0;
    int state_dim = 1;
    std::vector<double> states;   // N x state_dim, row-major
    std::vector<double> weights;  // empty until weighted
    double weight_sum = 0.0;
    std::vector<int> ancestors;   // selection indices that produced this cloud

    static constexpr double weight_floor = 1e-300;

    int size() const { return static_cast<int>(states.size()) / state_dim; }
    bool weighted() const { return !weights.empty(); }

    std::span<const double> state(int i) const {
        return {states.data() + static_cast<size_t>(i) * state_dim, static_cast<size_t>(state_dim)};
    }
    std::span<double> state(int i) {
        return {states.data() + static_cast<size_t>(i) * state_dim, static_cast<size_t>(state_dim)};
    }
};

// Walker alias table over probabilities proportional to nonnegative inputs;
// O(n) build, O(1) per draw, draws are i.i.d. Zero-probability entries are
// never returned.
class CategoricalSampler {
public:
    explicit CategoricalSampler(std::span<const double> weights);

    int draw(Xoshiro256& rng) const {
        const int n = static_cast<int>(threshold_.size());
        const int k = std::min(static_cast<int>(rng.uniform01() * n), n - 1);
        return rng.uniform01() < threshold_[static_cast<size_t>(k)] ? k : alias_[static_cast<size_t>(k)];
    }

    double total() const { return total_; }
    int size() const { return static_cast<int>(threshold_.size()); }

private:
    std::vector<double> threshold_;
    std::vector<int> alias_;
    double total_ = 0.0;
};

std::vector<int> sample_categorical(const CategoricalSampler& sampler, Xoshiro256& rng, int count);

// N i.i.d. draws from chi; weights unset.
ParticleCloud init_cloud(const Model& model, const Vec& theta, int N, const RunRng& rng, int threads = 1);

// w_i = g_theta(xi_i, y); throws Collapsed when every weight underflows.
void weight_cloud(ParticleCloud& cloud, const Observation& y, const Model& model, const Vec& theta,
                  int threads = 1);

// Multinomial selection from the given sampler followed by mutation through
// the model kernel; returns the unweighted cloud at t+1 with ancestor
// indices recorded.
ParticleCloud propagate(const ParticleCloud& cloud, const CategoricalSampler& sampler, const Model& model,
                        const Vec& theta, const RunRng& rng, int threads = 1);
ParticleCloud propagate(const ParticleCloud& cloud, const Model& model, const Vec& theta, const RunRng& rng,
                        int threads = 1);

enum class EstimateMode { predictor, filter };

// Predictor mode: N^-1 sum f(xi_i). Filter mode: sum (w_i / W) f(xi_i).
template <typename F>
double estimate(const ParticleCloud& cloud, F&& f, EstimateMode mode) {
    const int n = cloud.size();
    if (mode == EstimateMode::filter) {
        if (!cloud.weighted()) throw std::logic_error("estimate: filter mode needs a weighted cloud");
        if (!(cloud.weight_sum > 0.0)) throw Collapsed("estimate: zero weight sum");
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += cloud.weights[static_cast<size_t>(i)] * f(cloud.state(i));
        return acc / cloud.weight_sum;
    }
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += f(cloud.state(i));
    return acc / n;
}

}  // namespace paristf
