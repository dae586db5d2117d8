#include "paristf/oracle/finite_diff.hpp"

namespace paristf::oracle {

Vec finite_diff(const std::function<double(const Vec&)>& fn, const Vec& theta, double step) {
    Vec grad(theta.size());
    Vec point = theta;
    for (size_t k = 0; k < theta.size(); ++k) {
        point[k] = theta[k] + step;
        const double hi = fn(point);
        point[k] = theta[k] - step;
        const double lo = fn(point);
        point[k] = theta[k];
        grad[k] = (hi - lo) / (2.0 * step);
    }
    return grad;
}

Matrix finite_diff_vec(const std::function<Vec(const Vec&)>& fn, const Vec& theta, double step) {
    Vec point = theta;
    Matrix out;
    for (size_t k = 0; k < theta.size(); ++k) {
        point[k] = theta[k] + step;
        const Vec hi = fn(point);
        point[k] = theta[k] - step;
        const Vec lo = fn(point);
        point[k] = theta[k];
        if (k == 0) out = Matrix(static_cast<int>(theta.size()), static_cast<int>(hi.size()));
        for (size_t j = 0; j < hi.size(); ++j)
            out(static_cast<int>(k), static_cast<int>(j)) = (hi[j] - lo[j]) / (2.0 * step);
    }
    return out;
}

}  // namespace paristf::oracle
