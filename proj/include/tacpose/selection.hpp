#pragma once

#include <optional>
#include <vector>

#include "tacpose/latent_db.hpp"

namespace tacpose {

struct SensorObservation {
  Pose pose;  // sensor frame in world
  TactilePatch patch;
  Vec3 position() const { return pose.translation; }
};

/// Samples m surface points, renders a full-indent patch at each and encodes it.
LatentDatabase build_database(const MeshQuery& mesh, std::size_t m, const SensorModel& sensor, const Encoder& encoder,
                              std::uint64_t seed);

enum class Mode { ours, baseline };

struct SelectionConfig {
  Mode mode = Mode::ours;
  std::optional<double> delta_h;  // fixed threshold; quantile rule when empty
  double quantile = 0.10;
  FeatureMetric metric = FeatureMetric::projection;
};

struct Selection {
  std::vector<std::uint32_t> omega;  // ascending database indices
  double delta_h = 0.0;
};

/// Database indices whose feature distance to the encoded observation is below
/// delta_h. Under the quantile rule delta_h is the next double above the
/// quantile, so entries tied with the quantile are kept and delta_h > 0.
/// Baseline mode returns every index.
Selection select_compatible(const LatentDatabase& db, const SensorObservation& obs, const Encoder& encoder,
                            const SelectionConfig& cfg = {});

/// Lazy Cartesian product of the Omega sets in lexicographic order (last
/// sensor varies fastest). Entries are positions into each Omega.
class TupleStream {
 public:
  explicit TupleStream(std::vector<std::vector<std::uint32_t>> omegas);

  std::size_t arity() const { return omegas_.size(); }
  /// Product cardinality, saturating at UINT64_MAX.
  std::uint64_t size() const;
  /// Writes the next tuple of database indices; false when exhausted.
  bool next(std::vector<std::uint32_t>& tuple);
  void reset();
  const std::vector<std::vector<std::uint32_t>>& omegas() const { return omegas_; }

 private:
  std::vector<std::vector<std::uint32_t>> omegas_;
  std::vector<std::size_t> cursor_;
  bool done_ = false;
};

inline TupleStream make_tuples(std::vector<std::vector<std::uint32_t>> omegas) { return TupleStream(std::move(omegas)); }

}  // namespace tacpose
