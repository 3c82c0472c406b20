#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "tacpose/mesh.hpp"

namespace tacpose {

struct RayHit {
  double distance = 0.0;
  std::uint32_t face_id = 0;
  bool front_facing = true;  // ray enters through the face's outer side
};

struct ClosestPoint {
  Vec3 point = Vec3::Zero();
  double distance = std::numeric_limits<double>::infinity();
  std::uint32_t face_id = 0;
};

/// Read-only spatial index over a TriMesh. The bounding-volume hierarchy is
/// built once in the constructor; every query is const and thread-safe.
class MeshQuery {
 public:
  explicit MeshQuery(TriMesh mesh);

  const TriMesh& mesh() const { return mesh_; }
  const Aabb& bounds() const { return nodes_.front().box; }

  /// Nearest hit with t in (1e-9, t_max] using the watertight ray/triangle
  /// test. `direction` must be unit length.
  std::optional<RayHit> raycast(const Vec3& origin, const Vec3& direction,
                                double t_max = std::numeric_limits<double>::infinity()) const;
  /// Same contract, scanning every triangle.
  std::optional<RayHit> raycast_brute_force(const Vec3& origin, const Vec3& direction,
                                            double t_max = std::numeric_limits<double>::infinity()) const;

  ClosestPoint closest_point(const Vec3& p) const;
  ClosestPoint closest_point_brute_force(const Vec3& p) const;

  /// Generalized winding number, hierarchical dipole approximation for
  /// well-separated clusters (accuracy parameter beta = 2).
  double winding_number(const Vec3& p) const;
  /// Generalized winding number summed over every triangle.
  double winding_number_exact(const Vec3& p) const;

  /// Negative inside, positive outside; throws for open meshes.
  double signed_distance(const Vec3& p) const;
  bool inside(const Vec3& p) const;

  /// Faces whose closest point lies within `radius` of p.
  std::vector<std::uint32_t> faces_within(const Vec3& p, double radius) const;

 private:
  struct Node {
    Aabb box;
    std::uint32_t right = 0;   // index of second child (first child is this + 1)
    std::uint32_t first = 0;   // leaf: offset into order_
    std::uint32_t count = 0;   // leaf: number of faces; 0 for interior nodes
    Vec3 dipole_center = Vec3::Zero();
    Vec3 dipole_normal = Vec3::Zero();  // sum of area-weighted normals
    double dipole_radius = 0.0;
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids);
  void require_closed() const;

  TriMesh mesh_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
};

/// Closest point on triangle (a, b, c) to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Signed solid angle of triangle (a, b, c) seen from p, divided by 4 pi.
double triangle_winding(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

}  // namespace tacpose
