#include "tacpose/render.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tacpose {

void SensorModel::validate() const {
  if (!(gel_width > 0 && gel_height > 0 && max_indent > 0 && proxy_thickness > 0)) {
    throw std::invalid_argument("sensor dimensions must be positive");
  }
  if (pixels_u < 8 || pixels_v < 8) throw std::invalid_argument("sensor needs at least 8x8 pixels");
}

Vec3 SensorModel::pixel_center(int v, int u) const {
  return {(u + 0.5) * pitch_u() - 0.5 * gel_width, (v + 0.5) * pitch_v() - 0.5 * gel_height, 0.0};
}

bool TactilePatch::is_valid() const {
  if (pixels_u <= 0 || pixels_v <= 0 || depth.size() != static_cast<std::size_t>(pixels_u) * pixels_v) {
    return false;
  }
  return std::all_of(depth.begin(), depth.end(), [](float d) { return d >= 0.0f && d <= 1.0f; });
}

bool TactilePatch::empty_contact() const {
  return std::none_of(depth.begin(), depth.end(), [](float d) { return d > kContactThreshold; });
}

float TactilePatch::max_depth() const {
  return depth.empty() ? 0.0f : *std::max_element(depth.begin(), depth.end());
}

double TactilePatch::contact_fraction() const {
  if (depth.empty()) return 0.0;
  const auto n = std::count_if(depth.begin(), depth.end(), [](float d) { return d > kContactThreshold; });
  return static_cast<double>(n) / static_cast<double>(depth.size());
}

double TactilePatch::saturated_fraction() const {
  const float peak = max_depth();
  if (peak <= kContactThreshold) return 0.0;
  const float level = static_cast<float>(kSaturationRatio) * peak;
  const auto n = std::count_if(depth.begin(), depth.end(), [&](float d) { return d >= level; });
  return static_cast<double>(n) / static_cast<double>(depth.size());
}

TactilePatch TactilePatch::downsampled() const {
  TactilePatch out(pixels_u / 2, pixels_v / 2);
  for (int v = 0; v < out.pixels_v; ++v) {
    for (int u = 0; u < out.pixels_u; ++u) {
      out.at(v, u) = 0.25f * (at(2 * v, 2 * u) + at(2 * v, 2 * u + 1) + at(2 * v + 1, 2 * u) +
                              at(2 * v + 1, 2 * u + 1));
    }
  }
  return out;
}

TactilePatch TactilePatch::rotated_180() const {
  TactilePatch out(pixels_u, pixels_v);
  for (int v = 0; v < pixels_v; ++v) {
    for (int u = 0; u < pixels_u; ++u) out.at(v, u) = at(pixels_v - 1 - v, pixels_u - 1 - u);
  }
  return out;
}

TactilePatch TactilePatch::mirrored_u() const {
  TactilePatch out(pixels_u, pixels_v);
  for (int v = 0; v < pixels_v; ++v) {
    for (int u = 0; u < pixels_u; ++u) out.at(v, u) = at(v, pixels_u - 1 - u);
  }
  return out;
}

Vec3 tangent_axis(const Vec3& n) {
  const Vec3 a = std::abs(n.z()) > 0.99 ? Vec3::UnitX() : Vec3::UnitZ();
  return n.cross(a).normalized();
}

Pose place_sensor(const Vec3& position, const Vec3& outward_normal, double indent, const SensorModel& sensor) {
  if (indent < 0.0 || indent > sensor.max_indent) throw std::invalid_argument("indent outside [0, max_indent]");
  const Vec3 n = outward_normal.normalized();
  const Vec3 x = tangent_axis(n);
  const Vec3 z = -n;
  const Vec3 y = z.cross(x);
  Pose p;
  p.rotation.col(0) = x;
  p.rotation.col(1) = y;
  p.rotation.col(2) = z;
  p.translation = position + n * (sensor.max_indent - indent);
  return p;
}

Pose place_sensor_at_sample(const SurfaceSample& sample, double indent, const SensorModel& sensor) {
  return place_sensor(sample.position, sample.normal, indent, sensor);
}

TactilePatch render_patch(const MeshQuery& mesh, const Pose& placement, const SensorModel& sensor) {
  TactilePatch patch(sensor.pixels_u, sensor.pixels_v);
  const Vec3 dir = placement.rotation.col(2);
  // Everything beyond the gel's reach is irrelevant, except that a back-face
  // first hit anywhere tells us the origin is inside the object.
  for (int v = 0; v < sensor.pixels_v; ++v) {
    for (int u = 0; u < sensor.pixels_u; ++u) {
      const Vec3 origin = placement.apply(sensor.pixel_center(v, u));
      const auto hit = mesh.raycast(origin, dir);
      double d = 0.0;
      if (hit) {
        d = hit->front_facing ? std::clamp((sensor.max_indent - hit->distance) / sensor.max_indent, 0.0, 1.0)
                              : 1.0;
      }
      patch.at(v, u) = static_cast<float>(d);
    }
  }
  return patch;
}

std::vector<TactilePatch> render_patches(const MeshQuery& mesh, std::span<const Pose> placements,
                                         const SensorModel& sensor) {
  std::vector<TactilePatch> out(placements.size());
  const auto n = static_cast<std::ptrdiff_t>(placements.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = render_patch(mesh, placements[i], sensor);
  return out;
}

std::vector<TactilePatch> render_patches_serial(const MeshQuery& mesh, std::span<const Pose> placements,
                                                const SensorModel& sensor) {
  std::vector<TactilePatch> out;
  out.reserve(placements.size());
  for (const auto& p : placements) out.push_back(render_patch(mesh, p, sensor));
  return out;
}

}  // namespace tacpose
