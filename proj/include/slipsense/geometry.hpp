#pragma once

// Planar rigid-motion kinematics for marker displacement fields.
//
// Conventions used across the library: positions in millimetres in the sensor
// frame (x right, y up), angles in radians per frame, angular velocity
// counter-clockwise positive.  All functions are total on finite inputs.

#include <Eigen/Core>

#include <cassert>
#include <cmath>
#include <optional>

namespace slipsense {

using Vec2 = Eigen::Vector2d;

// Instantaneous planar rigid motion expressed about an arbitrary reference
// point: a point q moves with velocity  v + w x (q - p)  where the cross
// product is the scalar 2-D one.
template <typename Scalar>
struct RigidMotion2 {
  Eigen::Matrix<Scalar, 2, 1> ref_point{Scalar(0), Scalar(0)};
  Eigen::Matrix<Scalar, 2, 1> linear_velocity{Scalar(0), Scalar(0)};
  Scalar angular_velocity{0};
};

using RigidMotion2d = RigidMotion2<double>;

// Default cutoff below which a motion is treated as curl-free and the
// instantaneous centre of rotation is reported as absent.
inline constexpr double kOmegaEpsilon = 1e-8;

// Velocity of the material point at q under the motion m:
//   vx' = vx + w * (py - qy)
//   vy' = vy + w * (qx - px)
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> propagate_velocity(
    const RigidMotion2<Scalar>& m, const Eigen::Matrix<Scalar, 2, 1>& q) {
  assert(m.ref_point.allFinite() && m.linear_velocity.allFinite() && q.allFinite());
  return {m.linear_velocity.x() + m.angular_velocity * (m.ref_point.y() - q.y()),
          m.linear_velocity.y() + m.angular_velocity * (q.x() - m.ref_point.x())};
}

// Instantaneous centre of rotation: the unique point with zero velocity.
// Absent when |w| <= omega_epsilon (pure translation has no finite ICR).
template <typename Scalar>
std::optional<Eigen::Matrix<Scalar, 2, 1>> icr(
    const RigidMotion2<Scalar>& m, Scalar omega_epsilon = Scalar(kOmegaEpsilon)) {
  if (std::abs(m.angular_velocity) <= omega_epsilon) return std::nullopt;
  return Eigen::Matrix<Scalar, 2, 1>{
      m.ref_point.x() - m.linear_velocity.y() / m.angular_velocity,
      m.ref_point.y() + m.linear_velocity.x() / m.angular_velocity};
}

// One-frame displacement of q under m (first-order field).
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> apply_motion(const RigidMotion2<Scalar>& m,
                                         const Eigen::Matrix<Scalar, 2, 1>& q) {
  return q + propagate_velocity(m, q);
}

}  // namespace slipsense
