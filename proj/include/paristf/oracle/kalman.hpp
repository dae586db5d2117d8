#pragma once

#include "paristf/models/lgssm.hpp"

namespace paristf::oracle {

// Scalar Kalman recursions for the LGSSM; entry t conditions on y_{0:t-1},
// so entry 0 carries the prior.
struct KalmanState {
    double mean = 0.0;      // predictor mean
    double var = 0.0;       // predictor variance
    double loglik = 0.0;    // accumulated log-likelihood of y_{0:t-1}
};

struct KalmanSpec {
    double phi = 0.7;
    double state_var = 1.0;
    double obs_var = 1.0;
    double prior_mean = 0.0;
    double prior_var = 1.0;
};

std::vector<KalmanState> kalman_filter(const KalmanSpec& spec, const std::vector<double>& ys);

// Convenience wrapper resolving (phi, sigma^2) from an LgssmModel and theta;
// the prior is the model's fixed initial distribution.
std::vector<KalmanState> kalman_filter(const LgssmModel& model, const Vec& theta, const std::vector<Observation>& ys);

double kalman_loglik(const LgssmModel& model, const Vec& theta, const std::vector<Observation>& ys);

}  // namespace paristf::oracle
