#pragma once

#include <Eigen/Dense>

namespace palm {

/// Target state [x, vx, y, vy] in metres and metres per second.
using StateVec = Eigen::Vector4d;
using StateCov = Eigen::Matrix4d;
/// Position measurement [x, y].
using MeasVec = Eigen::Vector2d;
using MeasCov = Eigen::Matrix2d;

/// Position part of a state.
inline MeasVec position_of(const StateVec& x) { return {x(0), x(2)}; }

}  // namespace palm
