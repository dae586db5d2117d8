#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "paristf/types.hpp"

// Shared helpers for the test suites: moment utilities and a chi-squared
// tail probability for goodness-of-fit checks.

namespace testutil {

inline double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
    const double m = mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return acc / static_cast<double>(v.size() - 1);
}

inline double std_error(const std::vector<double>& v) {
    return std::sqrt(variance(v) / static_cast<double>(v.size()));
}

inline double rmse(const std::vector<double>& v, double truth) {
    double acc = 0.0;
    for (double x : v) acc += (x - truth) * (x - truth);
    return std::sqrt(acc / static_cast<double>(v.size()));
}

// Regularized incomplete gamma functions (series + continued fraction),
// accurate to ~1e-12; standard numerical construction.
inline double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) return 0.0;
    if (x == 0.0) return 0.0;
    const double gln = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15) break;
        }
        return sum * std::exp(-x + a * std::log(x) - gln);
    }
    // continued fraction for Q, return 1 - Q
    double b = x + 1.0 - a;
    double c = 1e300;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return 1.0 - std::exp(-x + a * std::log(x) - gln) * h;
}

// P(Chi2_k > x)
inline double chi2_sf(double x, double dof) { return 1.0 - gamma_p(dof / 2.0, x / 2.0); }

// Pearson statistic of observed counts against expected probabilities;
// returns the p-value. Cells with zero expectation must have zero counts.
inline double chi2_gof_pvalue(const std::vector<long>& counts, const std::vector<double>& probs) {
    const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), 0L));
    double stat = 0.0;
    int cells = 0;
    for (size_t i = 0; i < counts.size(); ++i) {
        const double expected = total * probs[i];
        if (expected <= 0.0) continue;
        const double diff = static_cast<double>(counts[i]) - expected;
        stat += diff * diff / expected;
        ++cells;
    }
    return chi2_sf(stat, static_cast<double>(cells - 1));
}

}  // namespace testutil
