#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>

namespace tacpose {

class Philox;

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

/// Rigid transform (rotation matrix + translation), meters.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }
  static Pose from_quaternion(const Eigen::Quaterniond& q, const Vec3& t);

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 apply_direction(const Vec3& d) const { return rotation * d; }
  Pose compose(const Pose& rhs) const;  // this * rhs
  Pose inverse() const;
  Eigen::Quaterniond quaternion() const;

  /// True when R R^T = I and det R = +1 within `tol`.
  bool is_valid(double tol = 1e-9) const;
};

/// 6-vector (translation; axis-angle). The translation block is used as the
/// pose translation directly, not through the SE(3) V matrix.
struct Twist {
  Vec6 xi = Vec6::Zero();

  Twist() = default;
  explicit Twist(const Vec6& v) : xi(v) {}
  Twist(const Vec3& translation, const Vec3& rotation) {
    xi << translation, rotation;
  }

  Vec3 translation() const { return xi.head<3>(); }
  Vec3 rotation() const { return xi.tail<3>(); }
};

Mat3 hat(const Vec3& w);

/// Rodrigues exponential of an axis-angle vector.
Mat3 rodrigues(const Vec3& w);

/// Left Jacobian of SO(3): R(w + d) ~= exp(hat(J_l(w) d)) R(w).
Mat3 left_jacobian(const Vec3& w);
/// Both of the above from one trigonometric evaluation; either output may be null.
void rodrigues_jacobian(const Vec3& w, Mat3* r, Mat3* jl);

/// Principal logarithm, ||result|| in [0, pi].
Vec3 log_so3(const Mat3& r);

Pose exp_map(const Twist& xi);
Twist twist_of(const Pose& pose);

/// Haar-uniform rotation: unit quaternion from four standard normals drawn
/// from `rng` in order (w, x, y, z).
Mat3 random_rotation(Philox& rng);
Pose sample_rotation_uniform(std::uint64_t seed);

/// Re-orthonormalizes a nearly orthonormal matrix (polar projection).
Mat3 orthonormalize(const Mat3& r);

}  // namespace tacpose
