#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tacpose/config.hpp"

namespace tacpose {

struct ExperimentConfig {
  std::vector<std::string> objects = primitives::suite_names();
  std::size_t scenes_per_object = 10;
  std::vector<std::size_t> sensor_counts = {3};
  std::vector<Mode> modes = {Mode::ours, Mode::baseline};
  std::size_t db_size = 500;
  std::uint64_t db_seed = 7;
  std::uint64_t scene_seed = 1000;
  std::size_t model_points = 512;
  std::string encoder = "analytic";
  PipelineConfig pipeline;
  SensorModel sensor;
  SceneConfig scene;
  bool record_timing = false;  // wall-clock seconds make reports non-reproducible
};

ExperimentConfig experiment_from_json(const Json& j);
Json to_json(const ExperimentConfig& c);

struct PoseMetrics {
  double position_cm = 0.0;
  double adi_auc = 0.0;
  double adi_auc_rotation = 0.0;
  double contact = 0.0;  // 100 when every sensor matches, else 0
};

struct SceneRecord {
  std::string object;
  std::size_t scene = 0;
  std::size_t sensors = 0;
  Mode mode = Mode::ours;
  bool ok = false;
  std::string error;
  PoseMetrics best;   // #1
  PoseMetrics top;    // mean over the reported top poses (#1-5)
  std::size_t ranked = 0;
  double final_loss = 0.0;
  double score = 0.0;
  std::vector<std::size_t> omega_sizes;
  std::size_t tuples_kept = 0;
  double seconds = 0.0;
};

struct Aggregate {
  std::size_t scenes = 0;    // successful scenes
  std::size_t failures = 0;
  PoseMetrics best_mean;
  PoseMetrics top_mean;
  double best_median_position_cm = 0.0;
};

/// Mean and median over the successful records; sums run over sorted values,
/// so the result does not depend on record order.
Aggregate aggregate(const std::vector<const SceneRecord*>& records);

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<SceneRecord> records;

  /// Records for one (mode, sensor count), optionally one object ("" = all).
  std::vector<const SceneRecord*> select(Mode mode, std::size_t sensors, const std::string& object = "") const;
  std::size_t failures() const;

  Json to_json() const;
  std::string markdown() const;
};

inline constexpr const char* kReportSchema = "tacpose-report/1";

using ProgressFn = std::function<void(const SceneRecord&)>;

/// For each object: one database shared by every mode and sensor count, then
/// scenes_per_object scenes of max(sensor_counts) sensors whose prefixes give
/// the smaller counts. Scene failures are recorded, never thrown.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress = {});

}  // namespace tacpose
