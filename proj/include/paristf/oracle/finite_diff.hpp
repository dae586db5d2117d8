#pragma once

#include <functional>

#include "paristf/types.hpp"

namespace paristf::oracle {

// Central finite differences, componentwise; default step sqrt(eps)-scaled
// for first differences in double precision.
inline constexpr double default_fd_step = 1e-5;

Vec finite_diff(const std::function<double(const Vec&)>& fn, const Vec& theta, double step = default_fd_step);

// Vector-valued version; row k holds d fn / d theta_k.
Matrix finite_diff_vec(const std::function<Vec(const Vec&)>& fn, const Vec& theta, double step = default_fd_step);

}  // namespace paristf::oracle
