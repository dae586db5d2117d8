#include "paristf/models/slam.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace paristf {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double gauss_log(double r, double sd) { return -0.5 * std::log(two_pi * sd * sd) - r * r / (2.0 * sd * sd); }

}  // namespace

double wrap_angle(double a) {
    a = std::fmod(a + std::numbers::pi, two_pi);
    if (a <= 0.0) a += two_pi;
    return a - std::numbers::pi;
}

SlamModel::SlamModel(SlamSpec spec) : spec_(std::move(spec)) {
    if (spec_.landmark_count < 1) throw InadmissibleParameter("slam: need at least one landmark");
    if (static_cast<int>(spec_.landmarks.size()) != 2 * spec_.landmark_count)
        throw InadmissibleParameter("slam: landmark coordinate count mismatch");
    if (!(spec_.motion_std_x > 0.0 && spec_.motion_std_y > 0.0 && spec_.motion_std_heading > 0.0 &&
          spec_.obs_std_range > 0.0 && spec_.obs_std_bearing > 0.0))
        throw InadmissibleParameter("slam: noise std devs must be positive");
    if (spec_.commands.empty()) throw InadmissibleParameter("slam: empty command sequence");
    free_slot_.assign(static_cast<size_t>(spec_.landmark_count), -2);
    for (int id : spec_.fixed_landmarks) {
        if (id < 0 || id >= spec_.landmark_count) throw InadmissibleParameter("slam: fixed landmark id out of range");
        free_slot_[static_cast<size_t>(id)] = -1;
    }
    for (int id = 0; id < spec_.landmark_count; ++id)
        if (free_slot_[static_cast<size_t>(id)] == -2) free_slot_[static_cast<size_t>(id)] = free_count_++;
}

Vec SlamModel::nominal_theta() const {
    Vec th(static_cast<size_t>(2 * free_count_));
    for (int id = 0; id < spec_.landmark_count; ++id) {
        const int s = free_slot_[static_cast<size_t>(id)];
        if (s < 0) continue;
        th[static_cast<size_t>(2 * s)] = spec_.landmarks[static_cast<size_t>(2 * id)];
        th[static_cast<size_t>(2 * s + 1)] = spec_.landmarks[static_cast<size_t>(2 * id + 1)];
    }
    return th;
}

void SlamModel::landmark_position(const Vec& theta, int id, double& lx, double& ly) const {
    const int s = free_slot_[static_cast<size_t>(id)];
    if (s < 0) {
        lx = spec_.landmarks[static_cast<size_t>(2 * id)];
        ly = spec_.landmarks[static_cast<size_t>(2 * id + 1)];
    } else {
        lx = theta[static_cast<size_t>(2 * s)];
        ly = theta[static_cast<size_t>(2 * s + 1)];
    }
}

std::pair<double, double> SlamModel::command_for_step(long t) const {
    const size_t n = spec_.commands.size();
    return spec_.commands[static_cast<size_t>(t) % n];
}

bool SlamModel::admissible(const Vec& theta) const {
    if (static_cast<int>(theta.size()) != param_dim()) return false;
    return std::all_of(theta.begin(), theta.end(), [](double v) { return std::isfinite(v); });
}

void SlamModel::sample_initial(Xoshiro256&, std::span<double> out) const {
    out[0] = spec_.start_x;
    out[1] = spec_.start_y;
    out[2] = spec_.start_heading;
}

void SlamModel::sample_transition(const Vec&, long t, std::span<const double> x, Xoshiro256& rng,
                                  std::span<double> out) const {
    const auto [d, alpha] = command_for_step(t);
    out[0] = x[0] + d * std::cos(x[2]) + spec_.motion_std_x * draw_normal(rng);
    out[1] = x[1] + d * std::sin(x[2]) + spec_.motion_std_y * draw_normal(rng);
    out[2] = wrap_angle(x[2] + alpha + spec_.motion_std_heading * draw_normal(rng));
}

double SlamModel::log_transition_density(const Vec&, long t, std::span<const double> x,
                                         std::span<const double> x_next) const {
    const auto [d, alpha] = command_for_step(t);
    const double rx = x_next[0] - (x[0] + d * std::cos(x[2]));
    const double ry = x_next[1] - (x[1] + d * std::sin(x[2]));
    const double rh = wrap_angle(x_next[2] - x[2] - alpha);
    return gauss_log(rx, spec_.motion_std_x) + gauss_log(ry, spec_.motion_std_y) +
           gauss_log(rh, spec_.motion_std_heading);
}

double SlamModel::transition_density(const Vec& theta, long t, std::span<const double> x,
                                     std::span<const double> x_next) const {
    return std::exp(log_transition_density(theta, t, x, x_next));
}

double SlamModel::density_bound(const Vec& theta) const {
    check_admissible(theta);
    return 1.0 / (std::sqrt(two_pi) * spec_.motion_std_x * std::sqrt(two_pi) * spec_.motion_std_y *
                  std::sqrt(two_pi) * spec_.motion_std_heading);
}

double SlamModel::log_emission_density(const Vec& theta, long, std::span<const double> x,
                                       const Observation& y) const {
    const auto& scan = std::get<SlamScan>(y);
    double ll = 0.0;
    for (const auto& s : scan) {
        double lx, ly;
        landmark_position(theta, s.id, lx, ly);
        const double dx = lx - x[0];
        const double dy = ly - x[1];
        const double r = std::hypot(dx, dy);
        ll += gauss_log(s.range - r, spec_.obs_std_range);
        const double eb = wrap_angle(s.bearing - (std::atan2(dy, dx) - x[2]));
        ll += gauss_log(eb, spec_.obs_std_bearing);
    }
    return ll;
}

double SlamModel::emission_density(const Vec& theta, long t, std::span<const double> x,
                                   const Observation& y) const {
    return std::exp(log_emission_density(theta, t, x, y));
}

Observation SlamModel::sample_emission(const Vec& theta, long, std::span<const double> x, Xoshiro256& rng) const {
    return slam_observe(*this, theta, x, rng);
}

void SlamModel::emission_score(const Vec& theta, long, std::span<const double> x, const Observation& y,
                               std::span<double> out) const {
    for (auto& v : out) v = 0.0;
    const auto& scan = std::get<SlamScan>(y);
    const double vr = spec_.obs_std_range * spec_.obs_std_range;
    const double vb = spec_.obs_std_bearing * spec_.obs_std_bearing;
    for (const auto& s : scan) {
        const int slot = free_slot_[static_cast<size_t>(s.id)];
        if (slot < 0) continue;
        double lx, ly;
        landmark_position(theta, s.id, lx, ly);
        const double dx = lx - x[0];
        const double dy = ly - x[1];
        const double r2 = dx * dx + dy * dy;
        const double r = std::sqrt(r2);
        const double er = s.range - r;
        const double eb = wrap_angle(s.bearing - (std::atan2(dy, dx) - x[2]));
        // d log g / d landmark = (er / vr) dr/dl + (eb / vb) db/dl
        out[static_cast<size_t>(2 * slot)] += er / vr * (dx / r) + eb / vb * (-dy / r2);
        out[static_cast<size_t>(2 * slot + 1)] += er / vr * (dy / r) + eb / vb * (dx / r2);
    }
}

void SlamModel::transition_score(const Vec&, long, std::span<const double>, std::span<const double>,
                                 std::span<double> out) const {
    // landmarks do not enter the motion model
    for (auto& v : out) v = 0.0;
}

SlamScan slam_observe(const SlamModel& model, const Vec& theta, std::span<const double> robot, Xoshiro256& rng) {
    const auto& spec = model.spec();
    SlamScan scan;
    for (int id = 0; id < spec.landmark_count; ++id) {
        double lx, ly;
        model.landmark_position(theta, id, lx, ly);
        const double dx = lx - robot[0];
        const double dy = ly - robot[1];
        const double r = std::hypot(dx, dy);
        if (r > spec.sensing_radius) continue;
        const double rel = wrap_angle(std::atan2(dy, dx) - robot[2]);
        if (std::abs(rel) > spec.fov_half_angle) continue;
        LandmarkSighting s;
        s.id = id;
        s.range = r + spec.obs_std_range * draw_normal(rng);
        s.bearing = wrap_angle(rel + spec.obs_std_bearing * draw_normal(rng));
        scan.push_back(s);
    }
    return scan;
}

std::vector<std::pair<double, double>> loop_commands(int straight_steps, int turn_steps, double step_len) {
    std::vector<std::pair<double, double>> cmds;
    const double turn = (std::numbers::pi / 2.0) / turn_steps;
    for (int leg = 0; leg < 4; ++leg) {
        for (int i = 0; i < straight_steps; ++i) cmds.emplace_back(step_len, 0.0);
        for (int i = 0; i < turn_steps; ++i) cmds.emplace_back(step_len, turn);
    }
    return cmds;
}

}  // namespace paristf
