#include "tacpose/se3.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tacpose/rng.hpp"

namespace tacpose {

Pose Pose::from_quaternion(const Eigen::Quaterniond& q, const Vec3& t) {
  return {q.normalized().toRotationMatrix(), t};
}

Pose Pose::compose(const Pose& rhs) const {
  return {rotation * rhs.rotation, rotation * rhs.translation + translation};
}

Pose Pose::inverse() const {
  const Mat3 rt = rotation.transpose();
  return {rt, -(rt * translation)};
}

Eigen::Quaterniond Pose::quaternion() const {
  Eigen::Quaterniond q(rotation);
  q.normalize();
  // Canonical sign: w >= 0, then first nonzero of (x, y, z) positive.
  if (q.w() < 0.0 || (q.w() == 0.0 && (q.x() < 0.0 || (q.x() == 0.0 && (q.y() < 0.0 ||
                                                                      (q.y() == 0.0 && q.z() < 0.0)))))) {
    q.coeffs() *= -1.0;
  }
  return q;
}

bool Pose::is_valid(double tol) const {
  const Mat3 e = rotation * rotation.transpose() - Mat3::Identity();
  return e.cwiseAbs().maxCoeff() <= tol && std::abs(rotation.determinant() - 1.0) <= tol &&
         translation.allFinite();
}

Mat3 hat(const Vec3& w) {
  Mat3 m;
  m << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return m;
}

void rodrigues_jacobian(const Vec3& w, Mat3* r, Mat3* jl) {
  const double theta2 = w.squaredNorm();
  const double theta = std::sqrt(theta2);
  const Mat3 k = hat(w);
  const Mat3 k2 = k * k;
  double a, b, c;  // sin(t)/t, (1 - cos(t))/t^2, (t - sin(t))/t^3
  if (theta < 1e-4) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
    c = 1.0 / 6.0 - theta2 / 120.0;
  } else {
    const double s = std::sin(theta), co = std::cos(theta);
    a = s / theta;
    b = (1.0 - co) / theta2;
    c = (theta - s) / (theta2 * theta);
  }
  if (r) *r = theta < 1e-12 ? Mat3(Mat3::Identity() + k) : Mat3(Mat3::Identity() + a * k + b * k2);
  if (jl) *jl = Mat3::Identity() + b * k + c * k2;
}

Mat3 rodrigues(const Vec3& w) {
  Mat3 r;
  rodrigues_jacobian(w, &r, nullptr);
  return r;
}

Mat3 left_jacobian(const Vec3& w) {
  Mat3 j;
  rodrigues_jacobian(w, nullptr, &j);
  return j;
}

Vec3 log_so3(const Mat3& r) {
  const Vec3 v(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double sin_theta = 0.5 * v.norm();
  const double cos_theta = std::clamp((r.trace() - 1.0) * 0.5, -1.0, 1.0);
  const double theta = std::atan2(sin_theta, cos_theta);
  if (theta < 1e-6) {
    // sin(t)/t ~ 1 - t^2/6
    return 0.5 * v / (1.0 - theta * theta / 6.0);
  }
  if (std::numbers::pi - theta > 1e-3) {
    return theta / (2.0 * sin_theta) * v;
  }
  // Near pi the antisymmetric part vanishes. The symmetric part is
  // cos(t) I + (1 - cos(t)) a a^T, which gives the axis up to sign.
  const Mat3 aat = (0.5 * (r + r.transpose()) - cos_theta * Mat3::Identity()) / (1.0 - cos_theta);
  int col = 0;
  aat.diagonal().maxCoeff(&col);
  Vec3 axis = aat.col(col) / std::sqrt(std::max(aat(col, col), 1e-300));
  axis.normalize();
  if (axis.dot(v) < 0.0) axis = -axis;
  return theta * axis;
}

Pose exp_map(const Twist& xi) { return {rodrigues(xi.rotation()), xi.translation()}; }

Twist twist_of(const Pose& pose) { return Twist(pose.translation, log_so3(pose.rotation)); }

Mat3 random_rotation(Philox& rng) {
  double w = 0, x = 0, y = 0, z = 0, n2 = 0;
  do {
    w = rng.normal();
    x = rng.normal();
    y = rng.normal();
    z = rng.normal();
    n2 = w * w + x * x + y * y + z * z;
  } while (n2 < 1e-20);
  return Eigen::Quaterniond(w, x, y, z).normalized().toRotationMatrix();
}

Pose sample_rotation_uniform(std::uint64_t seed) {
  Philox rng(seed);
  return {random_rotation(rng), Vec3::Zero()};
}

Mat3 orthonormalize(const Mat3& r) {
  Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return u * v.transpose();
}

}  // namespace tacpose
