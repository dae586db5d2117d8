#pragma once

#include <utility>

#include "paristf/model.hpp"

namespace paristf {

// Planar range-bearing SLAM. The state is the robot pose (x, y, heading),
// heading kept in (-pi, pi]. Landmark positions are the unknown parameters;
// landmarks listed in fixed_landmarks keep their true coordinates and stay
// out of theta, which removes the translation/rotation invariance.
struct SlamSpec {
    int landmark_count = 0;
    Vec landmarks;  // true coordinates (x1, y1, x2, y2, ...), length 2L
    double motion_std_x = 0.25;
    double motion_std_y = 0.25;
    double motion_std_heading = 3.0 * 3.14159265358979323846 / 180.0;
    double obs_std_range = 0.25;
    double obs_std_bearing = 3.14159265358979323846 / 180.0;
    double sensing_radius = 30.0;
    double fov_half_angle = 3.14159265358979323846 / 2.0;  // 180 degree field of vision
    std::vector<std::pair<double, double>> commands;       // (d_t, alpha_t), cycled when exhausted
    std::vector<int> fixed_landmarks;
    double start_x = 0.0, start_y = 0.0, start_heading = 0.0;
};

double wrap_angle(double a);  // into (-pi, pi]

class SlamModel final : public Model {
public:
    explicit SlamModel(SlamSpec spec);

    int state_dim() const override { return 3; }
    int param_dim() const override { return 2 * free_count_; }

    bool admissible(const Vec& theta) const override;

    void sample_initial(Xoshiro256& rng, std::span<double> out) const override;
    void sample_transition(const Vec& theta, long t, std::span<const double> x, Xoshiro256& rng,
                           std::span<double> out) const override;
    double transition_density(const Vec& theta, long t, std::span<const double> x,
                              std::span<const double> x_next) const override;
    double log_transition_density(const Vec& theta, long t, std::span<const double> x,
                                  std::span<const double> x_next) const override;
    double density_bound(const Vec& theta) const override;
    double emission_density(const Vec& theta, long t, std::span<const double> x,
                            const Observation& y) const override;
    double log_emission_density(const Vec& theta, long t, std::span<const double> x,
                                const Observation& y) const override;
    Observation sample_emission(const Vec& theta, long t, std::span<const double> x,
                                Xoshiro256& rng) const override;
    void emission_score(const Vec& theta, long t, std::span<const double> x, const Observation& y,
                        std::span<double> out) const override;
    void transition_score(const Vec& theta, long t, std::span<const double> x, std::span<const double> x_next,
                          std::span<double> out) const override;

    const SlamSpec& spec() const { return spec_; }

    // True coordinates of the free landmarks, in theta layout.
    Vec nominal_theta() const;

    // Landmark position under theta (fixed landmarks come from the spec).
    void landmark_position(const Vec& theta, int id, double& lx, double& ly) const;

    // -1 for fixed landmarks, else index into theta / 2.
    int free_slot(int id) const { return free_slot_[static_cast<size_t>(id)]; }

    std::pair<double, double> command_for_step(long t) const;

private:
    SlamSpec spec_;
    std::vector<int> free_slot_;
    int free_count_ = 0;
};

// Measurement of every landmark within sensing range and field of vision,
// range and bearing perturbed by the observation noises.
SlamScan slam_observe(const SlamModel& model, const Vec& theta, std::span<const double> robot, Xoshiro256& rng);

// Command sequence tracing a rounded rectangle, straight runs of
// straight_steps moves of length step_len joined by quarter turns spread
// over turn_steps moves. One lap has 4 * (straight_steps + turn_steps)
// commands; runs longer than a lap cycle through it.
std::vector<std::pair<double, double>> loop_commands(int straight_steps, int turn_steps, double step_len);

}  // namespace paristf
