#include "paristf/oracle/kalman.hpp"

#include <cmath>
#include <numbers>

namespace paristf::oracle {

std::vector<KalmanState> kalman_filter(const KalmanSpec& spec, const std::vector<double>& ys) {
    std::vector<KalmanState> out;
    out.reserve(ys.size() + 1);
    double m = spec.prior_mean;
    double p = spec.prior_var;
    double ll = 0.0;
    out.push_back({m, p, ll});
    for (double y : ys) {
        const double s = p + spec.obs_var;  // innovation variance
        const double v = y - m;
        ll += -0.5 * (std::log(2.0 * std::numbers::pi * s) + v * v / s);
        const double gain = p / s;
        const double m_post = m + gain * v;
        const double p_post = (1.0 - gain) * p;
        m = spec.phi * m_post;
        p = spec.phi * spec.phi * p_post + spec.state_var;
        out.push_back({m, p, ll});
    }
    return out;
}

std::vector<KalmanState> kalman_filter(const LgssmModel& model, const Vec& theta,
                                       const std::vector<Observation>& ys) {
    KalmanSpec ks;
    ks.phi = model.effective_phi(theta);
    ks.state_var = model.effective_state_var(theta);
    ks.obs_var = model.spec().obs_var;
    ks.prior_mean = 0.0;
    ks.prior_var = model.initial_var();
    std::vector<double> scalars;
    scalars.reserve(ys.size());
    for (const auto& y : ys) scalars.push_back(std::get<double>(y));
    return kalman_filter(ks, scalars);
}

double kalman_loglik(const LgssmModel& model, const Vec& theta, const std::vector<Observation>& ys) {
    return kalman_filter(model, theta, ys).back().loglik;
}

}  // namespace paristf::oracle
