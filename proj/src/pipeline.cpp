#include "tacpose/pipeline.hpp"

#include <stdexcept>

namespace tacpose {

PoseEstimate estimate_pose(const MeshQuery& object, const LatentDatabase& db, const Encoder& encoder,
                           std::span<const SensorObservation> observations, const SensorModel& sensor,
                           const PipelineConfig& cfg) {
  if (observations.empty()) throw std::invalid_argument("need at least one sensor");
  if (cfg.top_k < 1) throw std::invalid_argument("top_k must be >= 1");
  PoseEstimate out;
  std::vector<std::vector<std::uint32_t>> omegas;
  for (const auto& obs : observations) {
    auto sel = select_compatible(db, obs, encoder, cfg.selection);
    out.omega_sizes.push_back(sel.omega.size());
    out.delta_h.push_back(sel.delta_h);
    omegas.push_back(std::move(sel.omega));
  }
  const auto stream = make_tuples(std::move(omegas));
  const auto filtered = filter_by_distance(stream, db, observations, cfg.filter);
  out.tuples_kept = filtered.tuples.size();
  out.tuple_product = filtered.product_size;
  out.delta_d = filtered.delta_d;
  out.shrink_rounds = filtered.rounds;

  std::vector<Vec3> sensors;
  for (const auto& obs : observations) sensors.push_back(obs.position());
  const auto estimates = optimize(filtered.tuples, sensors, cfg.gd, cfg.seed);
  for (const auto& e : estimates) out.diverged_tuples += e.valid ? 0 : 1;

  auto ranked = rank(estimates, observations, object, sensor, cfg.rank);
  if (ranked.size() > cfg.top_k) ranked.resize(cfg.top_k);
  out.top = std::move(ranked);
  return out;
}

}  // namespace tacpose
