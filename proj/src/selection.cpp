#include "tacpose/selection.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tacpose {

LatentDatabase build_database(const MeshQuery& mesh, std::size_t m, const SensorModel& sensor, const Encoder& encoder,
                              std::uint64_t seed) {
  sensor.validate();
  const auto samples = sample_surface(mesh.mesh(), m, seed);
  LatentDatabase db;
  db.encoder_id = encoder.id();
  db.dim = encoder.dim();
  db.h_nc = encoder.h_nc();
  db.entries.resize(samples.size());
  const auto n = static_cast<std::ptrdiff_t>(samples.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& s = samples[i];
    const auto patch = render_patch(mesh, place_sensor_at_sample(s, sensor.max_indent, sensor), sensor);
    auto& e = db.entries[i];
    e.sample_id = s.sample_id;
    e.position = s.position;
    e.normal = s.normal;
    e.feature = encoder.encode(patch);
  }
  return db;
}

Selection select_compatible(const LatentDatabase& db, const SensorObservation& obs, const Encoder& encoder,
                            const SelectionConfig& cfg) {
  db.check_encoder(encoder);
  if (db.entries.empty()) throw std::runtime_error("empty database");
  Selection sel;
  if (cfg.mode == Mode::baseline) {
    sel.delta_h = std::numeric_limits<double>::infinity();
    sel.omega.resize(db.size());
    for (std::size_t i = 0; i < db.size(); ++i) sel.omega[i] = static_cast<std::uint32_t>(i);
    return sel;
  }
  const auto query = encoder.encode(obs.patch);
  if (cfg.delta_h) {
    if (!(*cfg.delta_h > 0.0)) throw std::invalid_argument("delta_h must be positive");
    sel.delta_h = *cfg.delta_h;
  } else {
    sel.delta_h = std::nextafter(auto_delta_h(db, query, cfg.quantile, cfg.metric),
                                 std::numeric_limits<double>::infinity());
  }
  for (std::size_t i = 0; i < db.size(); ++i) {
    if (feature_distance(query, db.entries[i].feature, cfg.metric) < sel.delta_h) {
      sel.omega.push_back(static_cast<std::uint32_t>(i));
    }
  }
  if (sel.omega.empty()) throw std::runtime_error("no compatible contacts — increase delta_h");
  return sel;
}

TupleStream::TupleStream(std::vector<std::vector<std::uint32_t>> omegas) : omegas_(std::move(omegas)) {
  if (omegas_.empty()) throw std::invalid_argument("need at least one sensor");
  for (const auto& o : omegas_) {
    if (o.empty()) throw std::invalid_argument("empty compatibility set");
  }
  reset();
}

std::uint64_t TupleStream::size() const {
  std::uint64_t n = 1;
  for (const auto& o : omegas_) {
    if (n > std::numeric_limits<std::uint64_t>::max() / o.size()) return std::numeric_limits<std::uint64_t>::max();
    n *= o.size();
  }
  return n;
}

void TupleStream::reset() {
  cursor_.assign(omegas_.size(), 0);
  done_ = false;
}

bool TupleStream::next(std::vector<std::uint32_t>& tuple) {
  if (done_) return false;
  tuple.resize(omegas_.size());
  for (std::size_t i = 0; i < omegas_.size(); ++i) tuple[i] = omegas_[i][cursor_[i]];
  std::size_t k = omegas_.size();
  while (k > 0) {
    --k;
    if (++cursor_[k] < omegas_[k].size()) return true;
    cursor_[k] = 0;
  }
  done_ = true;
  return true;
}

}  // namespace tacpose
