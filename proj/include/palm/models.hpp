#pragma once

#include <utility>

#include "palm/types.hpp"

namespace palm::models {

/// Constant-velocity motion with continuous white-noise acceleration.
struct MotionModel {
    double dt = 1.0;
    double sigma_p = 5.0;
    double survival_prob = 1.0;
    StateCov transition = StateCov::Identity();
    StateCov process_noise = StateCov::Zero();

    static MotionModel constant_velocity(double dt, double sigma_p, double survival_prob = 1.0);
};

/// Linear Gaussian position sensor with uniform Poisson clutter over a square
/// field of view centred on the origin.
struct MeasurementModel {
    Eigen::Matrix<double, 2, 4> observation = Eigen::Matrix<double, 2, 4>::Zero();
    MeasCov noise_cov = MeasCov::Identity();
    double sigma_m = 25.0;
    double detect_prob = 0.98;
    double fov_half_width = 2000.0;
    double clutter_mean = 10.0;
    /// Lower bound on the clutter intensity the filters assume, so that
    /// target returns outside the field of view or clutter-free runs keep
    /// well-defined Bernoulli denominators.
    double clutter_floor = 1e-15;

    static MeasurementModel position_sensor(double sigma_m, double detect_prob, double clutter_mean,
                                            double fov_half_width = 2000.0);

    [[nodiscard]] double fov_area() const { return 4.0 * fov_half_width * fov_half_width; }
    [[nodiscard]] bool in_fov(const MeasVec& y) const;
    /// Clutter intensity per square metre inside the field of view.
    [[nodiscard]] double clutter_density() const { return clutter_mean / fov_area(); }
};

/// Kalman time update: (F m, F P F' + Q).
std::pair<StateVec, StateCov> gaussian_predict(const StateVec& mean, const StateCov& cov, const MotionModel& model);

/// N(z; Hx, R)
double gaussian_likelihood(const MeasVec& z, const StateVec& x, const MeasurementModel& model);

/// Bivariate normal density.
double normal_density(const MeasVec& z, const MeasVec& mean, const MeasCov& cov);

/// clutter_mean / fov area inside the field of view, zero outside.
double clutter_intensity_at(const MeasVec& y, const MeasurementModel& model);

/// Clutter intensity as seen by the filters: the in-fov density everywhere,
/// never below clutter_floor.
double filter_clutter_intensity(const MeasVec& y, const MeasurementModel& model);

}  // namespace palm::models
