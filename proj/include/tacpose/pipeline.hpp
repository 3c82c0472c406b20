#pragma once

#include <span>
#include <vector>

#include "tacpose/ranking.hpp"

namespace tacpose {

struct PipelineConfig {
  SelectionConfig selection;
  FilterConfig filter;
  GdConfig gd;
  RankConfig rank;
  std::size_t top_k = 5;
  std::uint64_t seed = 1;
};

struct PoseEstimate {
  std::vector<RankedPose> top;  // best first, at most top_k
  std::vector<std::size_t> omega_sizes;
  std::vector<double> delta_h;
  std::size_t tuples_kept = 0;
  std::uint64_t tuple_product = 0;
  double delta_d = 0.0;
  int shrink_rounds = 0;
  std::size_t diverged_tuples = 0;

  const RankedPose& best() const { return top.front(); }
};

/// Selection, tuple filtering, gradient descent and ranking for one scene.
PoseEstimate estimate_pose(const MeshQuery& object, const LatentDatabase& db, const Encoder& encoder,
                           std::span<const SensorObservation> observations, const SensorModel& sensor,
                           const PipelineConfig& cfg);

}  // namespace tacpose
