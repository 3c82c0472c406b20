#pragma once

#include <span>
#include <vector>

#include "tacpose/mesh.hpp"
#include "tacpose/mesh_query.hpp"

namespace tacpose {

/// Planar-gel sensor geometry. The gel is the local x-y rectangle centered
/// at the sensor origin; local +z points out of the gel toward the object.
struct SensorModel {
  double gel_width = 0.019;     // along local x
  double gel_height = 0.016;    // along local y
  int pixels_u = 160;           // columns, along x
  int pixels_v = 120;           // rows, along y
  double max_indent = 0.0015;
  double proxy_thickness = 0.010;

  void validate() const;
  double pitch_u() const { return gel_width / pixels_u; }
  double pitch_v() const { return gel_height / pixels_v; }
  /// Sensor-frame position of pixel (row v, column u) center on the gel plane.
  Vec3 pixel_center(int v, int u) const;
};

/// Depth at which a pixel counts as in contact.
inline constexpr double kContactThreshold = 0.05;
/// Fraction of the patch maximum above which a pixel counts as saturated.
inline constexpr double kSaturationRatio = 0.95;

/// Normalized indentation image: 0 = no contact, 1 = max_indent. Row-major,
/// pixels_v rows of pixels_u columns.
struct TactilePatch {
  int pixels_u = 0;
  int pixels_v = 0;
  std::vector<float> depth;

  TactilePatch() = default;
  TactilePatch(int u, int v) : pixels_u(u), pixels_v(v), depth(static_cast<std::size_t>(u) * v, 0.0f) {}

  float& at(int v, int u) { return depth[static_cast<std::size_t>(v) * pixels_u + u]; }
  float at(int v, int u) const { return depth[static_cast<std::size_t>(v) * pixels_u + u]; }
  std::size_t size() const { return depth.size(); }

  bool is_valid() const;
  bool empty_contact() const;
  float max_depth() const;
  /// Fraction of pixels with depth > kContactThreshold.
  double contact_fraction() const;
  /// Fraction of pixels with depth >= kSaturationRatio * max_depth (0 for an
  /// all-zero patch).
  double saturated_fraction() const;

  /// 2x2 box-filter downsample (odd trailing row/column dropped).
  TactilePatch downsampled() const;
  /// Rotation by 180 degrees about the image center.
  TactilePatch rotated_180() const;
  TactilePatch mirrored_u() const;
};

/// Local x axis for a gel whose outward normal is `n` in the object frame:
/// normalize(n x a) with a = +z unless |n . z| > 0.99, then a = +x.
Vec3 tangent_axis(const Vec3& outward_normal);

/// Sensor pose for a contact at `sample`: local +z maps to -normal, the gel
/// center sits at position + normal * (max_indent - indent).
Pose place_sensor_at_sample(const SurfaceSample& sample, double indent, const SensorModel& sensor);
Pose place_sensor(const Vec3& position, const Vec3& outward_normal, double indent, const SensorModel& sensor);

/// Ray-cast contact depth. Each pixel casts along local +z; a first hit at
/// distance t gives clamp((max_indent - t) / max_indent, 0, 1). When the first
/// hit is a back face the gel point is inside the object and the pixel is 1.
TactilePatch render_patch(const MeshQuery& mesh, const Pose& placement, const SensorModel& sensor);

/// Batch rendering, one patch per placement (OpenMP over placements).
std::vector<TactilePatch> render_patches(const MeshQuery& mesh, std::span<const Pose> placements,
                                         const SensorModel& sensor);
std::vector<TactilePatch> render_patches_serial(const MeshQuery& mesh, std::span<const Pose> placements,
                                                const SensorModel& sensor);

}  // namespace tacpose
