#include "tacpose/metrics.hpp"

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

#include <algorithm>
#include <cmath>
#include <iterator>
#include <stdexcept>

namespace tacpose {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

double positional_error_cm(const Pose& estimate, const Pose& gt) {
  return 100.0 * (estimate.translation - gt.translation).norm();
}

std::vector<Vec3> model_points(const TriMesh& mesh, std::size_t count) {
  const auto& v = mesh.vertices();
  if (v.empty() || count == 0) throw std::invalid_argument("model needs at least one point");
  if (v.size() <= count) return v;
  std::vector<Vec3> out;
  for (auto i : farthest_point_indices(v, count)) out.push_back(v[i]);
  return out;
}

namespace {

using BPoint = bg::model::point<double, 3, bg::cs::cartesian>;

BPoint to_bpoint(const Vec3& p) { return BPoint(p.x(), p.y(), p.z()); }

void require_points(std::span<const Vec3> points) {
  if (points.empty()) throw std::invalid_argument("model needs at least one point");
}

std::vector<Vec3> posed(const Pose& pose, std::span<const Vec3> points) {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(pose.apply(p));
  return out;
}

double mean_sorted(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

Pose rotation_only_estimate(const Pose& estimate, const Pose& gt) {
  Pose e = estimate;
  e.translation = gt.translation;
  return e;
}

}  // namespace

double adi(const Pose& estimate, const Pose& gt, std::span<const Vec3> points) {
  require_points(points);
  const auto est = posed(estimate, points);
  std::vector<BPoint> bp;
  bp.reserve(est.size());
  for (const auto& p : est) bp.push_back(to_bpoint(p));
  const bgi::rtree<BPoint, bgi::quadratic<16>> tree(bp.begin(), bp.end());
  std::vector<double> d;
  d.reserve(points.size());
  std::vector<BPoint> hit;
  for (const auto& p : posed(gt, points)) {
    hit.clear();
    tree.query(bgi::nearest(to_bpoint(p), 1), std::back_inserter(hit));
    const Vec3 q(bg::get<0>(hit[0]), bg::get<1>(hit[0]), bg::get<2>(hit[0]));
    d.push_back((p - q).norm());
  }
  return mean_sorted(std::move(d));
}

double adi_brute_force(const Pose& estimate, const Pose& gt, std::span<const Vec3> points) {
  require_points(points);
  const auto est = posed(estimate, points);
  std::vector<double> d;
  for (const auto& p : posed(gt, points)) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : est) best = std::min(best, (p - q).norm());
    d.push_back(best);
  }
  return mean_sorted(std::move(d));
}

double auc_of_adi(double adi_value, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("threshold must be positive");
  // Symmetric poses leave round-off of order 1e-17 m; that counts as zero.
  if (adi_value < kAdiZero) adi_value = 0.0;
  double area = 0.0;
  double prev = adi_value <= 0.0 ? 1.0 : 0.0;
  for (int k = 1; k <= kAucSteps; ++k) {
    const double cur = adi_value <= threshold * k / kAucSteps ? 1.0 : 0.0;
    area += 0.5 * (prev + cur);
    prev = cur;
  }
  return 100.0 * area / kAucSteps;
}

double adi_auc(const Pose& estimate, const Pose& gt, std::span<const Vec3> points, bool rotation_only,
               double threshold) {
  const Pose e = rotation_only ? rotation_only_estimate(estimate, gt) : estimate;
  return auc_of_adi(adi(e, gt, points), threshold);
}

double adi_auc_brute_force(const Pose& estimate, const Pose& gt, std::span<const Vec3> points, bool rotation_only,
                           double threshold) {
  const Pose e = rotation_only ? rotation_only_estimate(estimate, gt) : estimate;
  return auc_of_adi(adi_brute_force(e, gt, points), threshold);
}

}  // namespace tacpose
