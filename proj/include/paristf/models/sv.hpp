#pragma once

#include "paristf/model.hpp"

namespace paristf {

// Hull-White stochastic volatility model
//   X_{t+1} = phi X_t + sigma V_{t+1},   Y_t = beta exp(X_t / 2) U_t,
// theta = (phi, sigma^2, beta^2). The initial distribution is the stationary
// law at the spec values and does not move with theta.
struct SvSpec {
    double phi = 0.8;
    double state_var = 0.1;  // sigma^2
    double beta2 = 1.0;      // beta^2
};

class SvModel final : public Model {
public:
    explicit SvModel(const SvSpec& spec);

    int state_dim() const override { return 1; }
    int param_dim() const override { return 3; }

    bool admissible(const Vec& theta) const override;
    void clamp(Vec& theta) const override;

    void sample_initial(Xoshiro256& rng, std::span<double> out) const override;
    void sample_transition(const Vec& theta, long t, std::span<const double> x, Xoshiro256& rng,
                           std::span<double> out) const override;
    double transition_density(const Vec& theta, long t, std::span<const double> x,
                              std::span<const double> x_next) const override;
    double log_transition_density(const Vec& theta, long t, std::span<const double> x,
                                  std::span<const double> x_next) const override;
    double density_bound(const Vec& theta) const override;
    double emission_density(const Vec& theta, long t, std::span<const double> x,
                            const Observation& y) const override;
    double log_emission_density(const Vec& theta, long t, std::span<const double> x,
                                const Observation& y) const override;
    Observation sample_emission(const Vec& theta, long t, std::span<const double> x,
                                Xoshiro256& rng) const override;
    void emission_score(const Vec& theta, long t, std::span<const double> x, const Observation& y,
                        std::span<double> out) const override;
    void transition_score(const Vec& theta, long t, std::span<const double> x, std::span<const double> x_next,
                          std::span<double> out) const override;
    void emission_grad(const Vec& theta, long t, std::span<const double> x, const Observation& y,
                       std::span<double> out) const override;

    const SvSpec& spec() const { return spec_; }
    Vec nominal_theta() const { return {spec_.phi, spec_.state_var, spec_.beta2}; }

private:
    SvSpec spec_;
    double init_var_ = 1.0;
};

}  // namespace paristf
