#include "paristf/simulate.hpp"

namespace paristf {

Trajectory simulate(const Model& model, const Vec& theta, long T, Xoshiro256& rng) {
    model.check_admissible(theta);
    if (T < 0) throw ConfigError("simulate: T must be >= 0");
    const int k = model.state_dim();
    Trajectory out;
    out.state_dim = k;
    out.states.resize(static_cast<size_t>(T + 1) * k);
    out.observations.reserve(static_cast<size_t>(T + 1));

    auto state = [&](long t) { return std::span<double>(out.states.data() + static_cast<size_t>(t) * k, static_cast<size_t>(k)); };

    model.sample_initial(rng, state(0));
    for (long t = 0; t <= T; ++t) {
        out.observations.push_back(model.sample_emission(theta, t, state(t), rng));
        if (t < T) model.sample_transition(theta, t, state(t), rng, state(t + 1));
    }
    return out;
}

}  // namespace paristf
