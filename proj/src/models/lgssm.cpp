#include "paristf/models/lgssm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace paristf {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double gauss_density(double x, double mean, double var) {
    const double r = x - mean;
    return std::exp(-r * r / (2.0 * var)) / std::sqrt(two_pi * var);
}

double gauss_log_density(double x, double mean, double var) {
    const double r = x - mean;
    return -0.5 * std::log(two_pi * var) - r * r / (2.0 * var);
}

}  // namespace

LgssmModel::LgssmModel(const LgssmSpec& spec) : spec_(spec) {
    if (!(std::abs(spec.phi) < 1.0)) throw InadmissibleParameter("lgssm: |phi| must be < 1");
    if (!(spec.state_var > 0.0) || !(spec.obs_var > 0.0))
        throw InadmissibleParameter("lgssm: variances must be positive");
    dim_ = (spec.estimate_phi ? 1 : 0) + (spec.estimate_state_var ? 1 : 0);
    init_var_ = spec.state_var / (1.0 - spec.phi * spec.phi);
}

Vec LgssmModel::nominal_theta() const {
    Vec th;
    if (spec_.estimate_phi) th.push_back(spec_.phi);
    if (spec_.estimate_state_var) th.push_back(spec_.state_var);
    return th;
}

double LgssmModel::effective_phi(const Vec& theta) const {
    return spec_.estimate_phi ? theta[0] : spec_.phi;
}

double LgssmModel::effective_state_var(const Vec& theta) const {
    if (!spec_.estimate_state_var) return spec_.state_var;
    return theta[spec_.estimate_phi ? 1 : 0];
}

bool LgssmModel::admissible(const Vec& theta) const {
    if (static_cast<int>(theta.size()) != dim_) return false;
    for (double v : theta)
        if (!std::isfinite(v)) return false;
    if (!(std::abs(effective_phi(theta)) < 1.0)) return false;
    if (!(effective_state_var(theta) > 0.0)) return false;
    return true;
}

void LgssmModel::clamp(Vec& theta) const {
    size_t k = 0;
    if (spec_.estimate_phi) {
        theta[k] = std::clamp(theta[k], -0.999, 0.999);
        ++k;
    }
    if (spec_.estimate_state_var) theta[k] = std::max(theta[k], 1e-6);
}

void LgssmModel::sample_initial(Xoshiro256& rng, std::span<double> out) const {
    out[0] = std::sqrt(init_var_) * draw_normal(rng);
}

void LgssmModel::sample_transition(const Vec& theta, long, std::span<const double> x, Xoshiro256& rng,
                                   std::span<double> out) const {
    out[0] = effective_phi(theta) * x[0] + std::sqrt(effective_state_var(theta)) * draw_normal(rng);
}

double LgssmModel::transition_density(const Vec& theta, long, std::span<const double> x,
                                      std::span<const double> x_next) const {
    return gauss_density(x_next[0], effective_phi(theta) * x[0], effective_state_var(theta));
}

double LgssmModel::log_transition_density(const Vec& theta, long, std::span<const double> x,
                                          std::span<const double> x_next) const {
    return gauss_log_density(x_next[0], effective_phi(theta) * x[0], effective_state_var(theta));
}

double LgssmModel::density_bound(const Vec& theta) const {
    check_admissible(theta);
    return 1.0 / std::sqrt(two_pi * effective_state_var(theta));
}

double LgssmModel::emission_density(const Vec&, long, std::span<const double> x, const Observation& y) const {
    return gauss_density(std::get<double>(y), x[0], spec_.obs_var);
}

double LgssmModel::log_emission_density(const Vec&, long, std::span<const double> x, const Observation& y) const {
    return gauss_log_density(std::get<double>(y), x[0], spec_.obs_var);
}

Observation LgssmModel::sample_emission(const Vec&, long, std::span<const double> x, Xoshiro256& rng) const {
    return x[0] + std::sqrt(spec_.obs_var) * draw_normal(rng);
}

void LgssmModel::emission_score(const Vec&, long, std::span<const double>, const Observation&,
                                std::span<double> out) const {
    // observation noise variance is never part of theta
    for (auto& v : out) v = 0.0;
}

void LgssmModel::emission_grad(const Vec&, long, std::span<const double>, const Observation&,
                               std::span<double> out) const {
    for (auto& v : out) v = 0.0;
}

void LgssmModel::transition_score(const Vec& theta, long, std::span<const double> x,
                                  std::span<const double> x_next, std::span<double> out) const {
    const double phi = effective_phi(theta);
    const double var = effective_state_var(theta);
    const double r = x_next[0] - phi * x[0];
    size_t k = 0;
    if (spec_.estimate_phi) out[k++] = x[0] * r / var;
    if (spec_.estimate_state_var) out[k] = -0.5 / var + r * r / (2.0 * var * var);
}

}  // namespace paristf
