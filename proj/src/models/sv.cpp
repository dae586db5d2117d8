#include "paristf/models/sv.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace paristf {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

SvModel::SvModel(const SvSpec& spec) : spec_(spec) {
    if (!(std::abs(spec.phi) < 1.0)) throw InadmissibleParameter("sv: |phi| must be < 1");
    if (!(spec.state_var > 0.0) || !(spec.beta2 > 0.0))
        throw InadmissibleParameter("sv: sigma^2 and beta^2 must be positive");
    init_var_ = spec.state_var / (1.0 - spec.phi * spec.phi);
}

bool SvModel::admissible(const Vec& theta) const {
    if (theta.size() != 3) return false;
    for (double v : theta)
        if (!std::isfinite(v)) return false;
    return std::abs(theta[0]) < 1.0 && theta[1] > 0.0 && theta[2] > 0.0;
}

void SvModel::clamp(Vec& theta) const {
    theta[0] = std::clamp(theta[0], -0.999, 0.999);
    theta[1] = std::max(theta[1], 1e-6);
    theta[2] = std::max(theta[2], 1e-6);
}

void SvModel::sample_initial(Xoshiro256& rng, std::span<double> out) const {
    out[0] = std::sqrt(init_var_) * draw_normal(rng);
}

void SvModel::sample_transition(const Vec& theta, long, std::span<const double> x, Xoshiro256& rng,
                                std::span<double> out) const {
    out[0] = theta[0] * x[0] + std::sqrt(theta[1]) * draw_normal(rng);
}

double SvModel::transition_density(const Vec& theta, long, std::span<const double> x,
                                   std::span<const double> x_next) const {
    const double r = x_next[0] - theta[0] * x[0];
    return std::exp(-r * r / (2.0 * theta[1])) / std::sqrt(two_pi * theta[1]);
}

double SvModel::log_transition_density(const Vec& theta, long, std::span<const double> x,
                                       std::span<const double> x_next) const {
    const double r = x_next[0] - theta[0] * x[0];
    return -0.5 * std::log(two_pi * theta[1]) - r * r / (2.0 * theta[1]);
}

double SvModel::density_bound(const Vec& theta) const {
    check_admissible(theta);
    return 1.0 / std::sqrt(two_pi * theta[1]);
}

double SvModel::emission_density(const Vec& theta, long, std::span<const double> x, const Observation& y) const {
    const double v = theta[2] * std::exp(x[0]);  // conditional variance of Y
    const double yy = std::get<double>(y);
    return std::exp(-yy * yy / (2.0 * v)) / std::sqrt(two_pi * v);
}

double SvModel::log_emission_density(const Vec& theta, long, std::span<const double> x,
                                     const Observation& y) const {
    const double v = theta[2] * std::exp(x[0]);
    const double yy = std::get<double>(y);
    return -0.5 * std::log(two_pi * v) - yy * yy / (2.0 * v);
}

Observation SvModel::sample_emission(const Vec& theta, long, std::span<const double> x, Xoshiro256& rng) const {
    return std::sqrt(theta[2]) * std::exp(x[0] / 2.0) * draw_normal(rng);
}

void SvModel::emission_score(const Vec& theta, long, std::span<const double> x, const Observation& y,
                             std::span<double> out) const {
    const double ex = std::exp(x[0]);
    const double yy = std::get<double>(y);
    const double b2 = theta[2];
    out[0] = 0.0;
    out[1] = 0.0;
    out[2] = -0.5 / b2 + yy * yy / (2.0 * b2 * b2 * ex);
}

void SvModel::emission_grad(const Vec& theta, long t, std::span<const double> x, const Observation& y,
                            std::span<double> out) const {
    // direct derivative of the Gaussian density in beta^2
    const double ex = std::exp(x[0]);
    const double yy = std::get<double>(y);
    const double b2 = theta[2];
    const double g = emission_density(theta, t, x, y);
    out[0] = 0.0;
    out[1] = 0.0;
    out[2] = g * (yy * yy - b2 * ex) / (2.0 * b2 * b2 * ex);
}

void SvModel::transition_score(const Vec& theta, long, std::span<const double> x, std::span<const double> x_next,
                               std::span<double> out) const {
    const double var = theta[1];
    const double r = x_next[0] - theta[0] * x[0];
    out[0] = x[0] * r / var;
    out[1] = -0.5 / var + r * r / (2.0 * var * var);
    out[2] = 0.0;
}

}  // namespace paristf
