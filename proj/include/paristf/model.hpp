#pragma once

#include <span>

#include "paristf/rng.hpp"
#include "paristf/types.hpp"

namespace paristf {

// Contract every state-space model satisfies: densities in natural and log
// scale, samplers driven by an explicit generator, analytic gradients, and a
// global bound on the transition density (required by accept-reject backward
// sampling). All members are pure functions of their arguments and safe to
// call concurrently.
//
// The time index t names the step the quantity belongs to: transitions move
// a state at time t to time t+1. Homogeneous models ignore it; the SLAM
// motion model reads its command sequence through it.
class Model {
public:
    virtual ~Model() = default;

    virtual int state_dim() const = 0;
    virtual int param_dim() const = 0;

    virtual bool admissible(const Vec& theta) const = 0;

    // Componentwise clamp into the admissible box; identity by default.
    virtual void clamp(Vec& theta) const { (void)theta; }

    // Initial distribution chi; deliberately parameter-free.
    virtual void sample_initial(Xoshiro256& rng, std::span<double> out) const = 0;

    virtual void sample_transition(const Vec& theta, long t, std::span<const double> x, Xoshiro256& rng,
                                   std::span<double> out) const = 0;

    virtual double transition_density(const Vec& theta, long t, std::span<const double> x,
                                      std::span<const double> x_next) const = 0;

    virtual double log_transition_density(const Vec& theta, long t, std::span<const double> x,
                                          std::span<const double> x_next) const;

    // Upper bound on the transition density over all state pairs; must be a
    // true bound, it drives accept-reject correctness.
    virtual double density_bound(const Vec& theta) const = 0;

    virtual double emission_density(const Vec& theta, long t, std::span<const double> x,
                                    const Observation& y) const = 0;

    virtual double log_emission_density(const Vec& theta, long t, std::span<const double> x,
                                        const Observation& y) const;

    virtual Observation sample_emission(const Vec& theta, long t, std::span<const double> x,
                                        Xoshiro256& rng) const = 0;

    // grad_theta log g(x, y)
    virtual void emission_score(const Vec& theta, long t, std::span<const double> x, const Observation& y,
                                std::span<double> out) const = 0;

    // grad_theta log q(x, x')
    virtual void transition_score(const Vec& theta, long t, std::span<const double> x,
                                  std::span<const double> x_next, std::span<double> out) const = 0;

    // grad_theta g(x, y) in natural scale; defaults to g * grad log g.
    virtual void emission_grad(const Vec& theta, long t, std::span<const double> x, const Observation& y,
                               std::span<double> out) const;

    // Complete-data score increment grad log g(x, y) + grad log q(x, x'),
    // with y observed at the time of x. Throws ZeroDensity when a vanishing
    // density makes the increment undefined.
    void score_increment(const Vec& theta, long t, std::span<const double> x, std::span<const double> x_next,
                         const Observation& y, std::span<double> out) const;

    void check_admissible(const Vec& theta) const;
};

}  // namespace paristf
