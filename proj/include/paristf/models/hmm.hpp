#pragma once

#include <functional>
#include <memory>

#include "paristf/model.hpp"

namespace paristf {

// Declares how theta maps to the transition and emission tables, together
// with the analytic partial derivative of each table. A d=0 map gives a
// parameter-free chain (tangent identically zero), handy as a degenerate
// test case.
struct HmmParameterization {
    int dim = 0;
    Vec lower;  // admissible box, size dim
    Vec upper;
    // fills Q (m x m) and G (m x n_symbols)
    std::function<void(const Vec& theta, Matrix& Q, Matrix& G)> eval;
    // fills dQ/dtheta_k and dG/dtheta_k
    std::function<void(const Vec& theta, int k, Matrix& dQ, Matrix& dG)> deriv;
};

// Finite-state hidden Markov chain: states 0..m-1 (stored as the single real
// coordinate of State), symbols 0..n-1. Rows of Q must be strictly positive
// and row-stochastic; chi is a point on the simplex.
struct HmmSpec {
    int num_states = 0;
    int num_symbols = 0;
    Vec chi;  // initial distribution, length m
    HmmParameterization par;
};

class HmmModel final : public Model {
public:
    explicit HmmModel(HmmSpec spec);

    int state_dim() const override { return 1; }
    int param_dim() const override { return spec_.par.dim; }

    bool admissible(const Vec& theta) const override;
    void clamp(Vec& theta) const override;

    void sample_initial(Xoshiro256& rng, std::span<double> out) const override;
    void sample_transition(const Vec& theta, long t, std::span<const double> x, Xoshiro256& rng,
                           std::span<double> out) const override;
    double transition_density(const Vec& theta, long t, std::span<const double> x,
                              std::span<const double> x_next) const override;
    double density_bound(const Vec& theta) const override;
    double emission_density(const Vec& theta, long t, std::span<const double> x,
                            const Observation& y) const override;
    Observation sample_emission(const Vec& theta, long t, std::span<const double> x,
                                Xoshiro256& rng) const override;
    void emission_score(const Vec& theta, long t, std::span<const double> x, const Observation& y,
                        std::span<double> out) const override;
    void transition_score(const Vec& theta, long t, std::span<const double> x, std::span<const double> x_next,
                          std::span<double> out) const override;
    void emission_grad(const Vec& theta, long t, std::span<const double> x, const Observation& y,
                       std::span<double> out) const override;

    const HmmSpec& spec() const { return spec_; }

    // Tables at theta; validated (positivity, row sums) on construction.
    struct Tables {
        Vec theta;
        Matrix Q, G;
        std::vector<Matrix> dQ, dG;
    };
    const Tables& tables(const Vec& theta) const;

    // Keeps the tables alive across calls that may evaluate other parameter
    // points in between (the cached reference would be replaced).
    std::shared_ptr<const Tables> tables_ptr(const Vec& theta) const;

private:
    std::shared_ptr<const Tables> build_tables(const Vec& theta) const;

    HmmSpec spec_;
    uint64_t instance_id_ = 0;
};

// (1 - theta) * A + theta * B rows; a one-parameter strictly mixing family
// when A and B are strictly positive row-stochastic matrices.
Matrix convex_mix(const Matrix& a, const Matrix& b, double w);

}  // namespace paristf
