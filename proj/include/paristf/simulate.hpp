#pragma once

#include "paristf/model.hpp"

namespace paristf {

struct Trajectory {
    int state_dim = 1;
    std::vector<double> states;  // (T+1) x state_dim, row-major
    std::vector<Observation> observations;

    long length() const { return static_cast<long>(observations.size()); }
    std::span<const double> state(long t) const {
        return {states.data() + static_cast<size_t>(t) * state_dim, static_cast<size_t>(state_dim)};
    }
};

// x_0 ~ chi, x_{t+1} ~ q_theta(x_t, .), y_t ~ g_theta(x_t, .); T transitions,
// T+1 states and observations.
Trajectory simulate(const Model& model, const Vec& theta, long T, Xoshiro256& rng);

}  // namespace paristf
