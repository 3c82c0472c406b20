#pragma once

#include <optional>
#include <string>

#include "tacpose/render.hpp"

namespace tacpose {

enum class ContactClass { flat, edge, corner, curved, none };

std::string to_string(ContactClass c);
ContactClass contact_class_from_string(const std::string& s);

struct GeometryClassConfig {
  double radius = 0.005;            // neighborhood, meters
  double cluster_angle_deg = 20.0;  // single-link threshold between face normals
  double flat_spread_deg = 5.0;     // one cluster narrower than this is flat
};

struct LocalGeometry {
  ContactClass cls = ContactClass::none;
  Vec3 normal = Vec3::UnitZ();  // mean of the cluster mean normals
  int clusters = 0;
  double spread_deg = 0.0;
};

/// Clusters the normals of faces within `radius` of p: one cluster is flat
/// (spread below flat_spread_deg) or curved, two is an edge, three or more a corner.
LocalGeometry analyze_local_geometry(const MeshQuery& mesh, const Vec3& p, const GeometryClassConfig& cfg = {});

struct PatchClassConfig {
  double widen = 0.002;              // extra range added to max_indent, meters
  double flat_min_contact = 0.8;     // contact fraction needed for flat
  double plane_residual = 0.02;      // rms, normalized depth
  double quadric_residual = 0.02;    // rms, normalized depth
  double corner_max_contact = 0.2;   // compact blobs below this area are corners
};

/// The sensor with max_indent widened by cfg.widen.
SensorModel widened_sensor(const SensorModel& sensor, const PatchClassConfig& cfg = {});

struct PatchShape {
  ContactClass cls = ContactClass::none;
  double contact_fraction = 0.0;
  double plane_rms = 0.0;
  double quadric_rms = 0.0;
  std::size_t fitted_pixels = 0;
};

/// Classifies a (widened) patch from the depth of its unsaturated contact
/// pixels: empty is none; a plane fit within plane_residual is flat when the
/// contact covers flat_min_contact of the gel; a quadric fit within
/// quadric_residual is curved; anything else is a corner when it covers less
/// than corner_max_contact and an edge otherwise.
PatchShape classify_patch(const TactilePatch& patch, const SensorModel& sensor, const PatchClassConfig& cfg = {});

/// Sensor pose that presses the gel along `normal` onto the object near
/// `point` so the closest pixel reaches depth indent / max_indent. Empty when
/// no pixel sees the object.
std::optional<Pose> place_sensor_touching(const MeshQuery& mesh, const Vec3& point, const Vec3& normal, double indent,
                                          const SensorModel& sensor);

}  // namespace tacpose
