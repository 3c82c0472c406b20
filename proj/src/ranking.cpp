#include "tacpose/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tacpose {

std::vector<Vec3> proxy_points(const SensorModel& sensor, const ProxyGrid& grid) {
  if (grid.nu < 1 || grid.nv < 1 || grid.nz < 1) throw std::invalid_argument("proxy grid must be non-empty");
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(grid.nu) * grid.nv * grid.nz);
  for (int k = 0; k < grid.nz; ++k) {
    const double z = -(k + 0.5) / grid.nz * sensor.proxy_thickness;
    for (int v = 0; v < grid.nv; ++v) {
      const double y = (v + 0.5) / grid.nv * sensor.gel_height - 0.5 * sensor.gel_height;
      for (int u = 0; u < grid.nu; ++u) {
        const double x = (u + 0.5) / grid.nu * sensor.gel_width - 0.5 * sensor.gel_width;
        pts.emplace_back(x, y, z);
      }
    }
  }
  return pts;
}

namespace {

// Proxy points expressed in the object frame.
std::vector<Vec3> object_frame_points(const Pose& object_pose, const SensorModel& sensor, const Pose& sensor_pose,
                                      const ProxyGrid& grid) {
  const Pose to_object = object_pose.inverse().compose(sensor_pose);
  auto pts = proxy_points(sensor, grid);
  for (auto& p : pts) p = to_object.apply(p);
  return pts;
}

}  // namespace

double penetration_depth(const MeshQuery& object, const Pose& object_pose, const SensorModel& sensor,
                         const Pose& sensor_pose, const ProxyGrid& grid) {
  if (!object.mesh().watertight()) throw std::runtime_error("open mesh: signed distance undefined");
  const Aabb& box = object.bounds();
  // Cheap rejection: the proxy's bounding sphere against the object box.
  const Pose to_object = object_pose.inverse().compose(sensor_pose);
  const Vec3 proxy_center = to_object.apply(Vec3(0.0, 0.0, -0.5 * sensor.proxy_thickness));
  const double proxy_radius =
      0.5 * std::sqrt(sensor.gel_width * sensor.gel_width + sensor.gel_height * sensor.gel_height +
                      sensor.proxy_thickness * sensor.proxy_thickness);
  if (box.squared_distance(proxy_center) > proxy_radius * proxy_radius) return 0.0;

  double depth = 0.0;
  for (const auto& p : object_frame_points(object_pose, sensor, sensor_pose, grid)) {
    if (!box.contains(p)) continue;
    const double d = object.closest_point(p).distance;
    if (d <= depth) continue;
    if (object.inside(p)) depth = d;
  }
  return depth;
}

double penetration_depth_reference(const MeshQuery& object, const Pose& object_pose, const SensorModel& sensor,
                                   const Pose& sensor_pose, const ProxyGrid& grid) {
  if (!object.mesh().watertight()) throw std::runtime_error("open mesh: signed distance undefined");
  double depth = 0.0;
  for (const auto& p : object_frame_points(object_pose, sensor, sensor_pose, grid)) {
    const double d = object.closest_point_brute_force(p).distance;
    const double sd = object.winding_number_exact(p) > 0.5 ? -d : d;
    depth = std::max(depth, -sd);
  }
  return depth;
}

void sort_ranked(std::vector<RankedPose>& poses) {
  std::sort(poses.begin(), poses.end(), [](const RankedPose& a, const RankedPose& b) {
    if (a.score != b.score) return a.score < b.score;
    if (a.final_loss != b.final_loss) return a.final_loss < b.final_loss;
    return a.tuple_index < b.tuple_index;
  });
}

namespace {

RankedPose score_one(const TupleEstimate& e, std::span<const SensorObservation> observations,
                     const MeshQuery& object, const SensorModel& sensor, const RankConfig& cfg) {
  RankedPose r;
  r.pose = e.pose;
  r.final_loss = e.loss;
  r.tuple_index = e.tuple_index;
  for (const auto& obs : observations) {
    r.max_penetration = std::max(r.max_penetration, penetration_depth(object, e.pose, sensor, obs.pose, cfg.grid));
  }
  r.score = r.final_loss + cfg.penetration_weight * r.max_penetration;
  return r;
}

std::vector<const TupleEstimate*> valid_estimates(std::span<const TupleEstimate> estimates) {
  std::vector<const TupleEstimate*> v;
  for (const auto& e : estimates) {
    if (e.valid) v.push_back(&e);
  }
  if (v.empty()) throw std::runtime_error("every pose hypothesis diverged");
  return v;
}

}  // namespace

std::vector<RankedPose> rank(std::span<const TupleEstimate> estimates, std::span<const SensorObservation> observations,
                             const MeshQuery& object, const SensorModel& sensor, const RankConfig& cfg) {
  const auto valid = valid_estimates(estimates);
  std::vector<RankedPose> out(valid.size());
  const auto n = static_cast<std::ptrdiff_t>(valid.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = score_one(*valid[i], observations, object, sensor, cfg);
  sort_ranked(out);
  return out;
}

std::vector<RankedPose> rank_serial(std::span<const TupleEstimate> estimates,
                                    std::span<const SensorObservation> observations, const MeshQuery& object,
                                    const SensorModel& sensor, const RankConfig& cfg) {
  std::vector<RankedPose> out;
  for (const auto* e : valid_estimates(estimates)) out.push_back(score_one(*e, observations, object, sensor, cfg));
  sort_ranked(out);
  return out;
}

}  // namespace tacpose
