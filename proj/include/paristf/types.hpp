#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace paristf {

using Vec = std::vector<double>;

// One landmark measurement inside a SLAM scan.
struct LandmarkSighting {
    int id = 0;
    double range = 0.0;
    double bearing = 0.0;  // radians, in (-pi, pi]
};

using SlamScan = std::vector<LandmarkSighting>;

// Scalar observation (LGSSM, SV), symbol index (finite HMM) or scan (SLAM).
using Observation = std::variant<double, int, SlamScan>;

// Minimal dense row-major matrix; enough for finite-HMM tables and oracles.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    std::span<double> row(int i) { return {a.data() + static_cast<size_t>(i) * cols, static_cast<size_t>(cols)}; }
    std::span<const double> row(int i) const {
        return {a.data() + static_cast<size_t>(i) * cols, static_cast<size_t>(cols)};
    }
};

struct InadmissibleParameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ZeroDensity : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All importance weights vanished; the particle approximation lost support.
struct Collapsed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AllZeroWeights : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AllZeroBackwardWeights : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateLikelihood : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ZeroLikelihood : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace paristf
