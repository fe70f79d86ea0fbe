#include "palm/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace palm::models {

MotionModel MotionModel::constant_velocity(double dt, double sigma_p, double survival_prob) {
    MotionModel m;
    m.dt = dt;
    m.sigma_p = sigma_p;
    m.survival_prob = survival_prob;
    m.transition = StateCov::Identity();
    m.transition(0, 1) = dt;
    m.transition(2, 3) = dt;
    Eigen::Matrix2d block;
    block << dt * dt * dt / 3.0, dt * dt / 2.0, dt * dt / 2.0, dt;
    m.process_noise.setZero();
    m.process_noise.block<2, 2>(0, 0) = sigma_p * sigma_p * block;
    m.process_noise.block<2, 2>(2, 2) = sigma_p * sigma_p * block;
    return m;
}

MeasurementModel MeasurementModel::position_sensor(double sigma_m, double detect_prob, double clutter_mean,
                                                   double fov_half_width) {
    MeasurementModel m;
    m.observation.setZero();
    m.observation(0, 0) = 1.0;
    m.observation(1, 2) = 1.0;
    m.sigma_m = sigma_m;
    m.noise_cov = sigma_m * sigma_m * MeasCov::Identity();
    m.detect_prob = detect_prob;
    m.clutter_mean = clutter_mean;
    m.fov_half_width = fov_half_width;
    return m;
}

bool MeasurementModel::in_fov(const MeasVec& y) const {
    return std::abs(y(0)) <= fov_half_width && std::abs(y(1)) <= fov_half_width;
}

std::pair<StateVec, StateCov> gaussian_predict(const StateVec& mean, const StateCov& cov, const MotionModel& model) {
    const StateCov& f = model.transition;
    StateCov p = f * cov * f.transpose() + model.process_noise;
    p = 0.5 * (p + p.transpose());
    return {f * mean, p};
}

double normal_density(const MeasVec& z, const MeasVec& mean, const MeasCov& cov) {
    const MeasVec d = z - mean;
    const double det = cov(0, 0) * cov(1, 1) - cov(0, 1) * cov(1, 0);
    const double q = (cov(1, 1) * d(0) * d(0) - (cov(0, 1) + cov(1, 0)) * d(0) * d(1) + cov(0, 0) * d(1) * d(1)) / det;
    return std::exp(-0.5 * q) / (2.0 * std::numbers::pi * std::sqrt(det));
}

double gaussian_likelihood(const MeasVec& z, const StateVec& x, const MeasurementModel& model) {
    return normal_density(z, model.observation * x, model.noise_cov);
}

double clutter_intensity_at(const MeasVec& y, const MeasurementModel& model) {
    return model.in_fov(y) ? model.clutter_density() : 0.0;
}

double filter_clutter_intensity(const MeasVec& /*y*/, const MeasurementModel& model) {
    return std::max(model.clutter_density(), model.clutter_floor);
}

}  // namespace palm::models
