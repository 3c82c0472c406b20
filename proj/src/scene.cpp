#include "tacpose/scene.hpp"

#include <stdexcept>

#include "tacpose/ranking.hpp"
#include "tacpose/rng.hpp"

namespace tacpose {

Scene Scene::prefix(std::size_t n) const {
  if (n > size()) throw std::invalid_argument("scene has fewer sensors than requested");
  Scene s = *this;
  s.sensors.resize(n);
  s.labels.resize(n);
  s.contact_points.resize(n);
  return s;
}

namespace {

constexpr std::uint64_t kPoolTag = 0x706f6f6c;
constexpr std::uint64_t kPoseTag = 0x706f7365;
constexpr std::uint64_t kSlotTag = 0x736c6f74;

struct Candidate {
  Vec3 position;
  Vec3 normal;
};

}  // namespace

Scene make_scene(const MeshQuery& mesh, const std::string& object, std::span<const ContactClass> contacts,
                 std::uint64_t seed, const SensorModel& sensor, const SceneConfig& cfg) {
  if (contacts.empty()) throw std::invalid_argument("need at least one contact");
  sensor.validate();
  const auto pool = sample_surface(mesh.mesh(), cfg.pool_size, derive_seed(seed, kPoolTag));
  std::vector<std::vector<Candidate>> by_class(5);
  for (const auto& s : pool) {
    const auto g = analyze_local_geometry(mesh, s.position, cfg.geometry);
    by_class[static_cast<std::size_t>(g.cls)].push_back({s.position, g.normal});
  }
  for (auto c : contacts) {
    if (c == ContactClass::none) throw std::invalid_argument("'none' is not a contact class");
    if (by_class[static_cast<std::size_t>(c)].empty()) {
      throw std::runtime_error("contact class '" + to_string(c) + "' not present on mesh");
    }
  }

  Scene scene;
  scene.object = object;
  Philox pose_rng(derive_seed(seed, kPoseTag));
  Pose gt;
  gt.rotation = random_rotation(pose_rng);
  for (int k = 0; k < 3; ++k) gt.translation[k] = pose_rng.uniform(-cfg.translation_range, cfg.translation_range);
  scene.ground_truth = gt;

  const SensorModel wide = widened_sensor(sensor, cfg.patch);
  std::vector<Pose> placed;
  for (std::size_t slot = 0; slot < contacts.size(); ++slot) {
    const auto cls = contacts[slot];
    const auto& cands = by_class[static_cast<std::size_t>(cls)];
    Philox rng(derive_seed(seed, kSlotTag, slot));
    bool ok = false;
    for (int attempt = 0; attempt < cfg.max_tries && !ok; ++attempt) {
      const auto& c = cands[rng.below(cands.size())];
      const double indent = rng.uniform(cfg.indent_min, cfg.indent_max) * sensor.max_indent;
      const auto placement = place_sensor_touching(mesh, c.position, c.normal, indent, sensor);
      if (!placement) continue;
      bool far = true;
      for (const auto& p : placed) far = far && (p.translation - placement->translation).norm() >= cfg.min_separation;
      if (!far) continue;
      auto patch = render_patch(mesh, *placement, sensor);
      if (patch.empty_contact()) continue;
      if (penetration_depth(mesh, Pose::identity(), sensor, *placement) > 0.0) continue;
      if (classify_patch(render_patch(mesh, *placement, wide), wide, cfg.patch).cls != cls) continue;
      placed.push_back(*placement);
      scene.sensors.push_back({gt.compose(*placement), std::move(patch)});
      scene.labels.push_back(cls);
      scene.contact_points.push_back(c.position);
      ok = true;
    }
    if (!ok) {
      throw std::runtime_error("could not place a '" + to_string(cls) + "' contact in " +
                               std::to_string(cfg.max_tries) + " tries");
    }
  }
  return scene;
}

std::vector<ContactClass> default_contacts(const std::string& object, std::size_t index, std::size_t count) {
  using C = ContactClass;
  std::vector<C> base;
  if (object == "sphere") {
    base = {C::curved, C::curved, C::curved};
  } else if (object == "cylinder") {
    base = {C::curved, C::flat, C::edge};
  } else {
    base = {C::flat, C::edge, C::corner};
  }
  std::vector<C> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(base[(index + i) % base.size()]);
  return out;
}

bool contact_accuracy(const MeshQuery& mesh, const Scene& scene, const Pose& estimate, const SensorModel& sensor,
                      const PatchClassConfig& cfg) {
  if (scene.labels.size() != scene.sensors.size()) throw std::invalid_argument("scene lacks contact labels");
  const SensorModel wide = widened_sensor(sensor, cfg);
  const Pose to_object = estimate.inverse();
  for (std::size_t i = 0; i < scene.sensors.size(); ++i) {
    const Pose placement = to_object.compose(scene.sensors[i].pose);
    const auto shape = classify_patch(render_patch(mesh, placement, wide), wide, cfg);
    if (shape.cls == ContactClass::none || shape.cls != scene.labels[i]) return false;
  }
  return true;
}

}  // namespace tacpose
