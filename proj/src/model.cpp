#include "paristf/model.hpp"

#include <cmath>
#include <vector>

namespace paristf {

double Model::log_transition_density(const Vec& theta, long t, std::span<const double> x,
                                     std::span<const double> x_next) const {
    return std::log(transition_density(theta, t, x, x_next));
}

double Model::log_emission_density(const Vec& theta, long t, std::span<const double> x,
                                   const Observation& y) const {
    return std::log(emission_density(theta, t, x, y));
}

void Model::emission_grad(const Vec& theta, long t, std::span<const double> x, const Observation& y,
                          std::span<double> out) const {
    emission_score(theta, t, x, y, out);
    const double g = emission_density(theta, t, x, y);
    for (auto& v : out) v *= g;
}

void Model::score_increment(const Vec& theta, long t, std::span<const double> x, std::span<const double> x_next,
                            const Observation& y, std::span<double> out) const {
    const int d = param_dim();
    emission_score(theta, t, x, y, out);
    // stack buffer keeps the per-pair hot path allocation-free
    double buf[32];
    std::vector<double> heap;
    std::span<double> qs;
    if (d <= 32) {
        qs = {buf, static_cast<size_t>(d)};
    } else {
        heap.resize(static_cast<size_t>(d));
        qs = heap;
    }
    transition_score(theta, t, x, x_next, qs);
    for (int k = 0; k < d; ++k) {
        out[static_cast<size_t>(k)] += qs[static_cast<size_t>(k)];
        if (!std::isfinite(out[static_cast<size_t>(k)]))
            throw ZeroDensity("score increment undefined: density vanishes at evaluation point");
    }
}

void Model::check_admissible(const Vec& theta) const {
    if (static_cast<int>(theta.size()) != param_dim())
        throw InadmissibleParameter("parameter dimension mismatch");
    if (!admissible(theta)) throw InadmissibleParameter("parameter violates model constraints");
}

}  // namespace paristf
