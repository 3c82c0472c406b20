#include "tacpose/contact_class.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace tacpose {

std::string to_string(ContactClass c) {
  switch (c) {
    case ContactClass::flat: return "flat";
    case ContactClass::edge: return "edge";
    case ContactClass::corner: return "corner";
    case ContactClass::curved: return "curved";
    case ContactClass::none: return "none";
  }
  return "none";
}

ContactClass contact_class_from_string(const std::string& s) {
  for (auto c : {ContactClass::flat, ContactClass::edge, ContactClass::corner, ContactClass::curved,
                 ContactClass::none}) {
    if (to_string(c) == s) return c;
  }
  throw std::invalid_argument("unknown contact class: " + s);
}

namespace {

double angle_deg(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b)) * 180.0 / std::numbers::pi;
}

}  // namespace

LocalGeometry analyze_local_geometry(const MeshQuery& mesh, const Vec3& p, const GeometryClassConfig& cfg) {
  LocalGeometry g;
  const auto faces = mesh.faces_within(p, cfg.radius);
  if (faces.empty()) return g;
  const auto& normals = mesh.mesh().face_normals();
  const auto& areas = mesh.mesh().face_areas();
  // Single-link clustering by union-find.
  std::vector<std::size_t> parent(faces.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < faces.size(); ++i) {
    for (std::size_t j = i + 1; j < faces.size(); ++j) {
      if (angle_deg(normals[faces[i]], normals[faces[j]]) < cfg.cluster_angle_deg) parent[find(i)] = find(j);
    }
  }
  std::vector<std::size_t> roots;
  std::vector<Vec3> sums;
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const auto r = find(i);
    auto it = std::find(roots.begin(), roots.end(), r);
    if (it == roots.end()) {
      roots.push_back(r);
      sums.push_back(Vec3::Zero());
      it = roots.end() - 1;
    }
    sums[static_cast<std::size_t>(it - roots.begin())] += areas[faces[i]] * normals[faces[i]];
  }
  g.clusters = static_cast<int>(roots.size());
  Vec3 mean = Vec3::Zero();
  for (const auto& s : sums) mean += s.normalized();
  g.normal = mean.norm() > 1e-12 ? Vec3(mean.normalized()) : normals[faces.front()];
  for (std::size_t i = 0; i < faces.size(); ++i) {
    for (std::size_t j = i + 1; j < faces.size(); ++j) {
      g.spread_deg = std::max(g.spread_deg, angle_deg(normals[faces[i]], normals[faces[j]]));
    }
  }
  if (g.clusters == 1) {
    g.cls = g.spread_deg < cfg.flat_spread_deg ? ContactClass::flat : ContactClass::curved;
  } else if (g.clusters == 2) {
    g.cls = ContactClass::edge;
  } else {
    g.cls = ContactClass::corner;
  }
  return g;
}

SensorModel widened_sensor(const SensorModel& sensor, const PatchClassConfig& cfg) {
  SensorModel w = sensor;
  w.max_indent += cfg.widen;
  return w;
}

namespace {

// RMS residual of a least-squares fit of depth on the given polynomial terms.
double fit_rms(const Eigen::MatrixXd& a, const Eigen::VectorXd& z) {
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(z);
  return std::sqrt((a * coef - z).squaredNorm() / static_cast<double>(z.size()));
}

}  // namespace

PatchShape classify_patch(const TactilePatch& patch, const SensorModel& sensor, const PatchClassConfig& cfg) {
  PatchShape s;
  s.contact_fraction = patch.contact_fraction();
  if (patch.empty_contact()) return s;
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < patch.size(); ++i) {
    const float d = patch.depth[i];
    if (d > kContactThreshold && d < 0.999f) idx.push_back(static_cast<Eigen::Index>(i));
  }
  s.fitted_pixels = idx.size();
  constexpr std::size_t kMinFit = 12;
  if (idx.size() < kMinFit) {
    // Nearly everything is clamped; only the footprint is informative.
    s.cls = s.contact_fraction >= cfg.flat_min_contact    ? ContactClass::flat
            : s.contact_fraction < cfg.corner_max_contact ? ContactClass::corner
                                                          : ContactClass::edge;
    return s;
  }
  const auto n = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd plane(n, 3), quad(n, 6);
  Eigen::VectorXd z(n);
  // Coordinates in units of the gel half-width keep the fits well conditioned.
  const double scale = 0.5 * sensor.gel_width;
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto i = idx[static_cast<std::size_t>(r)];
    const int v = static_cast<int>(i / patch.pixels_u), u = static_cast<int>(i % patch.pixels_u);
    const Vec3 c = sensor.pixel_center(v, u) / scale;
    plane.row(r) << 1.0, c.x(), c.y();
    quad.row(r) << 1.0, c.x(), c.y(), c.x() * c.x(), c.x() * c.y(), c.y() * c.y();
    z[r] = patch.depth[static_cast<std::size_t>(i)];
  }
  s.plane_rms = fit_rms(plane, z);
  s.quadric_rms = fit_rms(quad, z);
  if (s.plane_rms <= cfg.plane_residual && s.contact_fraction >= cfg.flat_min_contact) {
    s.cls = ContactClass::flat;
  } else if (s.quadric_rms <= cfg.quadric_residual && s.plane_rms > cfg.plane_residual) {
    s.cls = ContactClass::curved;
  } else {
    s.cls = s.contact_fraction < cfg.corner_max_contact ? ContactClass::corner : ContactClass::edge;
  }
  return s;
}

std::optional<Pose> place_sensor_touching(const MeshQuery& mesh, const Vec3& point, const Vec3& normal, double indent,
                                          const SensorModel& sensor) {
  constexpr double kBackoff = 0.01;
  Pose pose = place_sensor(point, normal, sensor.max_indent, sensor);
  const Vec3 dir = pose.rotation.col(2);
  pose.translation -= kBackoff * dir;
  double t_min = std::numeric_limits<double>::infinity();
  for (int v = 0; v < sensor.pixels_v; ++v) {
    for (int u = 0; u < sensor.pixels_u; ++u) {
      const auto hit = mesh.raycast(pose.apply(sensor.pixel_center(v, u)), dir);
      if (hit && hit->front_facing) t_min = std::min(t_min, hit->distance);
    }
  }
  if (!std::isfinite(t_min)) return std::nullopt;
  pose.translation += (t_min - (sensor.max_indent - indent)) * dir;
  return pose;
}

}  // namespace tacpose
