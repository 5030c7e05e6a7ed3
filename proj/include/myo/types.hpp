#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <stdexcept>
#include <string>
#include <vector>

namespace myo {

using Vec3 = Eigen::Vector3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Transform = Eigen::Isometry3d;

// Joint configuration, radians. One entry per joint.
using Posture = Eigen::VectorXd;

inline bool all_finite(const VecX& v) { return v.allFinite(); }

// Contract violations (bad dimensions, non-finite inputs, invalid indices).
struct InvalidInput : std::invalid_argument {
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

// The plant integrator produced a non-finite quantity.
struct SimDiverged : std::runtime_error {
  explicit SimDiverged(const std::string& quantity)
      : std::runtime_error("simulation diverged: first non-finite quantity is " + quantity),
        quantity(quantity) {}
  std::string quantity;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidInput(msg);
}

}  // namespace myo
