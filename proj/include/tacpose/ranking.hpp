#pragma once

#include <span>
#include <vector>

#include "tacpose/optimizer.hpp"
#include "tacpose/selection.hpp"

namespace tacpose {

struct ProxyGrid {
  int nu = 16;
  int nv = 16;
  int nz = 4;
};

/// Cell-centered points filling the sensor body: the gel rectangle extruded
/// proxy_thickness behind the gel plane (local z in (-thickness, 0)).
std::vector<Vec3> proxy_points(const SensorModel& sensor, const ProxyGrid& grid = {});

/// max over proxy points of max(0, -signed_distance) in meters, with the object
/// at `object_pose` and the sensor at `sensor_pose` (both world frame).
double penetration_depth(const MeshQuery& object, const Pose& object_pose, const SensorModel& sensor,
                         const Pose& sensor_pose, const ProxyGrid& grid = {});
/// Same value from brute-force closest points and exact winding numbers.
double penetration_depth_reference(const MeshQuery& object, const Pose& object_pose, const SensorModel& sensor,
                                   const Pose& sensor_pose, const ProxyGrid& grid = {});

struct RankedPose {
  Pose pose;
  double final_loss = 0.0;
  double max_penetration = 0.0;
  double score = 0.0;  // final_loss + penetration_weight * max_penetration
  std::size_t tuple_index = 0;
};

struct RankConfig {
  double penetration_weight = 1.0;
  ProxyGrid grid;
};

/// Scores every valid estimate and sorts ascending by (score, final_loss,
/// tuple_index). Penetration is evaluated in parallel.
std::vector<RankedPose> rank(std::span<const TupleEstimate> estimates, std::span<const SensorObservation> observations,
                             const MeshQuery& object, const SensorModel& sensor, const RankConfig& cfg = {});
std::vector<RankedPose> rank_serial(std::span<const TupleEstimate> estimates,
                                    std::span<const SensorObservation> observations, const MeshQuery& object,
                                    const SensorModel& sensor, const RankConfig& cfg = {});

/// Sort order used by rank().
void sort_ranked(std::vector<RankedPose>& poses);

}  // namespace tacpose
