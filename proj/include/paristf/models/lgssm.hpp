#pragma once

#include "paristf/model.hpp"

namespace paristf {

// Linear Gaussian state-space model
//   X_{t+1} = phi X_t + sigma V_{t+1},   Y_t = X_t + c W_t,
// with V, W standard normal. Which of (phi, sigma^2) are free parameters is
// chosen per instance, so the same model backs d=1 and d=2 gradient tests.
// The initial distribution is the stationary law at the spec's base values
// and stays fixed when theta moves.
struct LgssmSpec {
    double phi = 0.7;
    double state_var = 1.0;  // sigma^2
    double obs_var = 1.0;    // c^2
    bool estimate_phi = true;
    bool estimate_state_var = false;
};

class LgssmModel final : public Model {
public:
    explicit LgssmModel(const LgssmSpec& spec);

    int state_dim() const override { return 1; }
    int param_dim() const override { return dim_; }

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

    const LgssmSpec& spec() const { return spec_; }

    // Base-value parameter vector in this instance's parameterization.
    Vec nominal_theta() const;

    double effective_phi(const Vec& theta) const;
    double effective_state_var(const Vec& theta) const;

    double initial_var() const { return init_var_; }

private:
    LgssmSpec spec_;
    int dim_ = 0;
    double init_var_ = 1.0;
};

}  // namespace paristf
