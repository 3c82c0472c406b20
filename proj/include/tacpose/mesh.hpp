#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "tacpose/se3.hpp"

namespace tacpose {

struct Aabb {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  void extend(const Aabb& b) {
    min = min.cwiseMin(b.min);
    max = max.cwiseMax(b.max);
  }
  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 extent() const { return max - min; }
  double squared_distance(const Vec3& p) const {
    const Vec3 d = (min - p).cwiseMax(Vec3::Zero()).cwiseMax(p - max);
    return d.squaredNorm();
  }
};

using Triangle = std::array<std::uint32_t, 3>;

/// Indexed triangle mesh with per-face unit normals and areas.
///
/// Construct through `TriMesh::build`, which validates indices, drops
/// zero-area faces and records whether the surface is closed and
/// consistently oriented (every directed edge has exactly one opposite).
class TriMesh {
 public:
  TriMesh() = default;

  static TriMesh build(std::vector<Vec3> vertices, std::vector<Triangle> triangles);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<Vec3>& face_normals() const { return face_normals_; }
  const std::vector<double>& face_areas() const { return face_areas_; }
  bool watertight() const { return watertight_; }
  bool empty() const { return triangles_.empty(); }
  std::size_t size() const { return triangles_.size(); }
  std::size_t dropped_degenerate() const { return dropped_degenerate_; }

  const Vec3& vertex(std::uint32_t face, int corner) const {
    return vertices_[triangles_[face][corner]];
  }
  Aabb bounds() const;
  double total_area() const;

  TriMesh transformed(const Pose& pose) const;
  TriMesh scaled(double factor) const;

 private:
  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Vec3> face_normals_;
  std::vector<double> face_areas_;
  bool watertight_ = false;
  std::size_t dropped_degenerate_ = 0;
};

struct SurfaceSample {
  Vec3 position = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  std::uint32_t face_id = 0;
  std::uint32_t sample_id = 0;
};

/// Area-weighted random surface samples; deterministic per seed.
/// With `farthest_point` set, 4m candidates are drawn and thinned to m by
/// farthest-point subsampling.
std::vector<SurfaceSample> sample_surface(const TriMesh& mesh, std::size_t m, std::uint64_t seed,
                                          bool farthest_point = false);

/// Greedy farthest-point order starting at index `start`; returns k indices.
std::vector<std::size_t> farthest_point_indices(std::span<const Vec3> points, std::size_t k,
                                                std::size_t start = 0);

namespace primitives {

TriMesh box(double size_x, double size_y, double size_z);
TriMesh cube(double edge);
TriMesh cylinder(double radius, double height, int segments = 64);
TriMesh icosphere(double radius, int subdivisions);
/// L-shaped extrusion: two arms of `arm` length and `thickness` width in the
/// x-y plane, extruded `depth` along z; centered on its bounding box.
TriMesh l_bracket(double arm, double thickness, double depth);

/// Desk-scale suite: "cube", "box", "cylinder", "sphere", "lbracket".
TriMesh by_name(const std::string& name);
std::vector<std::string> suite_names();

}  // namespace primitives

}  // namespace tacpose
