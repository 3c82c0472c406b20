#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tacpose/contact_class.hpp"
#include "tacpose/selection.hpp"

namespace tacpose {

struct Scene {
  std::string object;
  std::optional<Pose> ground_truth;  // object frame in world
  std::vector<SensorObservation> sensors;
  std::vector<ContactClass> labels;   // one per sensor
  std::vector<Vec3> contact_points;   // object frame, one per sensor

  std::size_t size() const { return sensors.size(); }
  /// The first n sensors of this scene.
  Scene prefix(std::size_t n) const;
};

struct SceneConfig {
  std::size_t pool_size = 4000;     // candidate surface samples per scene
  int max_tries = 500;              // per sensor
  double min_separation = 0.02;     // between sensor centers, meters
  double indent_min = 0.6;          // fraction of max_indent
  double indent_max = 1.0;
  double translation_range = 0.2;   // ground truth translation in [-r, r]^3
  GeometryClassConfig geometry;
  PatchClassConfig patch;
};

/// Random ground-truth pose and one touching sensor per requested class.
/// Each sensor's widened re-render must classify as its label, the object
/// must not penetrate any sensor, and sensors are min_separation apart.
Scene make_scene(const MeshQuery& mesh, const std::string& object, std::span<const ContactClass> contacts,
                 std::uint64_t seed, const SensorModel& sensor, const SceneConfig& cfg = {});

/// Contact classes used for scene `index` of an object: three classes the
/// object offers, rotated by the index.
std::vector<ContactClass> default_contacts(const std::string& object, std::size_t index, std::size_t count = 3);

/// Re-renders every sensor against the object at `estimate` and classifies
/// the widened patch; true when each one touches and matches its label.
bool contact_accuracy(const MeshQuery& mesh, const Scene& scene, const Pose& estimate, const SensorModel& sensor,
                      const PatchClassConfig& cfg = {});

}  // namespace tacpose
