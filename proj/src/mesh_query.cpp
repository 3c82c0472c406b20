#include "tacpose/mesh_query.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tacpose {

namespace {

constexpr std::uint32_t kLeafSize = 4;
constexpr double kRayEpsilon = 1e-9;
constexpr double kDipoleBeta = 3.0;

// Woop, Benthin, Wald, "Watertight Ray/Triangle Intersection" (JCGT 2013).
struct WatertightRay {
  Vec3 origin;
  Vec3 direction;
  Vec3 inv_direction;
  int kx, ky, kz;
  double sx, sy, sz;

  WatertightRay(const Vec3& o, const Vec3& d) : origin(o), direction(d) {
    for (int i = 0; i < 3; ++i) inv_direction[i] = 1.0 / d[i];
    d.cwiseAbs().maxCoeff(&kz);
    kx = (kz + 1) % 3;
    ky = (kx + 1) % 3;
    if (d[kz] < 0.0) std::swap(kx, ky);
    sx = d[kx] / d[kz];
    sy = d[ky] / d[kz];
    sz = 1.0 / d[kz];
  }

  // Returns t, or NaN on a miss.
  double intersect(const Vec3& a, const Vec3& b, const Vec3& c) const {
    const Vec3 pa = a - origin, pb = b - origin, pc = c - origin;
    const double ax = pa[kx] - sx * pa[kz], ay = pa[ky] - sy * pa[kz];
    const double bx = pb[kx] - sx * pb[kz], by = pb[ky] - sy * pb[kz];
    const double cx = pc[kx] - sx * pc[kz], cy = pc[ky] - sy * pc[kz];
    const double u = cx * by - cy * bx;
    const double v = ax * cy - ay * cx;
    const double w = bx * ay - by * ax;
    if ((u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0)) return std::nan("");
    const double det = u + v + w;
    if (det == 0.0) return std::nan("");
    const double t = (u * sz * pa[kz] + v * sz * pb[kz] + w * sz * pc[kz]) / det;
    return t;
  }

  bool hits_box(const Aabb& box, double t_max) const {
    double t0 = 0.0, t1 = t_max;
    for (int i = 0; i < 3; ++i) {
      double tn = (box.min[i] - origin[i]) * inv_direction[i];
      double tf = (box.max[i] - origin[i]) * inv_direction[i];
      if (tn > tf) std::swap(tn, tf);
      // NaN (0 * inf) leaves the interval unchanged.
      t0 = tn > t0 ? tn : t0;
      t1 = tf < t1 ? tf : t1;
      if (t0 > t1 * (1.0 + 4e-16)) return false;
    }
    return true;
  }
};

}  // namespace

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Ericson, Real-Time Collision Detection, 5.1.5.
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

double triangle_winding(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Van Oosterom & Strackee solid angle.
  const Vec3 x = a - p, y = b - p, z = c - p;
  const double lx = x.norm(), ly = y.norm(), lz = z.norm();
  const double num = x.dot(y.cross(z));
  const double den = lx * ly * lz + x.dot(y) * lz + y.dot(z) * lx + z.dot(x) * ly;
  return std::atan2(num, den) / (2.0 * std::numbers::pi);
}

MeshQuery::MeshQuery(TriMesh mesh) : mesh_(std::move(mesh)) {
  if (mesh_.empty()) throw std::runtime_error("degenerate mesh");
  const auto n = static_cast<std::uint32_t>(mesh_.size());
  order_.resize(n);
  std::vector<Vec3> centroids(n);
  for (std::uint32_t f = 0; f < n; ++f) {
    order_[f] = f;
    centroids[f] = (mesh_.vertex(f, 0) + mesh_.vertex(f, 1) + mesh_.vertex(f, 2)) / 3.0;
  }
  nodes_.reserve(2 * n / kLeafSize + 2);
  build(0, n, centroids);
}

std::uint32_t MeshQuery::build(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  Aabb box, cbox;
  double area = 0.0;
  Vec3 weighted = Vec3::Zero(), normal = Vec3::Zero();
  for (std::uint32_t i = begin; i < end; ++i) {
    const auto f = order_[i];
    for (int k = 0; k < 3; ++k) box.extend(mesh_.vertex(f, k));
    cbox.extend(centroids[f]);
    const double a = mesh_.face_areas()[f];
    area += a;
    weighted += a * centroids[f];
    normal += a * mesh_.face_normals()[f];
  }
  const Vec3 center = weighted / area;
  double radius = 0.0;
  for (std::uint32_t i = begin; i < end; ++i) {
    for (int k = 0; k < 3; ++k) radius = std::max(radius, (mesh_.vertex(order_[i], k) - center).norm());
  }
  {
    Node& node = nodes_[index];
    node.box = box;
    node.dipole_center = center;
    node.dipole_normal = normal;
    node.dipole_radius = radius;
  }
  if (end - begin <= kLeafSize) {
    nodes_[index].first = begin;
    nodes_[index].count = end - begin;
    return index;
  }
  int axis = 0;
  cbox.extent().maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t l, std::uint32_t r) {
                     if (centroids[l][axis] != centroids[r][axis]) return centroids[l][axis] < centroids[r][axis];
                     return l < r;
                   });
  build(begin, mid, centroids);
  const auto right = build(mid, end, centroids);
  nodes_[index].right = right;
  return index;
}

std::optional<RayHit> MeshQuery::raycast(const Vec3& origin, const Vec3& direction, double t_max) const {
  const WatertightRay ray(origin, direction);
  std::optional<RayHit> best;
  double best_t = t_max;
  std::uint32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!ray.hits_box(node.box, best_t)) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const auto f = order_[i];
        const double t = ray.intersect(mesh_.vertex(f, 0), mesh_.vertex(f, 1), mesh_.vertex(f, 2));
        if (t > kRayEpsilon && (t < best_t || (t == best_t && best && f < best->face_id))) {
          best_t = t;
          best = RayHit{t, f, direction.dot(mesh_.face_normals()[f]) < 0.0};
        }
      }
    } else {
      stack[top++] = node.right;
      stack[top++] = static_cast<std::uint32_t>(&node - nodes_.data()) + 1;
    }
  }
  return best;
}

std::optional<RayHit> MeshQuery::raycast_brute_force(const Vec3& origin, const Vec3& direction,
                                                     double t_max) const {
  const WatertightRay ray(origin, direction);
  std::optional<RayHit> best;
  double best_t = t_max;
  for (std::uint32_t f = 0; f < mesh_.size(); ++f) {
    const double t = ray.intersect(mesh_.vertex(f, 0), mesh_.vertex(f, 1), mesh_.vertex(f, 2));
    if (t > kRayEpsilon && (t < best_t || (t == best_t && best && f < best->face_id))) {
      best_t = t;
      best = RayHit{t, f, direction.dot(mesh_.face_normals()[f]) < 0.0};
    }
  }
  return best;
}

ClosestPoint MeshQuery::closest_point(const Vec3& p) const {
  ClosestPoint best;
  double best_d2 = std::numeric_limits<double>::infinity();
  std::uint32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.box.squared_distance(p) >= best_d2) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const auto f = order_[i];
        const Vec3 q = closest_point_on_triangle(p, mesh_.vertex(f, 0), mesh_.vertex(f, 1), mesh_.vertex(f, 2));
        const double d2 = (q - p).squaredNorm();
        if (d2 < best_d2) {
          best_d2 = d2;
          best.point = q;
          best.face_id = f;
        }
      }
    } else {
      const auto left = static_cast<std::uint32_t>(&node - nodes_.data()) + 1;
      // Visit the nearer child first.
      const double dl = nodes_[left].box.squared_distance(p);
      const double dr = nodes_[node.right].box.squared_distance(p);
      if (dl <= dr) {
        stack[top++] = node.right;
        stack[top++] = left;
      } else {
        stack[top++] = left;
        stack[top++] = node.right;
      }
    }
  }
  best.distance = std::sqrt(best_d2);
  return best;
}

ClosestPoint MeshQuery::closest_point_brute_force(const Vec3& p) const {
  ClosestPoint best;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::uint32_t f = 0; f < mesh_.size(); ++f) {
    const Vec3 q = closest_point_on_triangle(p, mesh_.vertex(f, 0), mesh_.vertex(f, 1), mesh_.vertex(f, 2));
    const double d2 = (q - p).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best.point = q;
      best.face_id = f;
    }
  }
  best.distance = std::sqrt(best_d2);
  return best;
}

double MeshQuery::winding_number(const Vec3& p) const {
  double w = 0.0;
  std::uint32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    const Vec3 r = node.dipole_center - p;
    const double dist = r.norm();
    if (!node.box.contains(p) && dist > kDipoleBeta * node.dipole_radius) {
      w += r.dot(node.dipole_normal) / (4.0 * std::numbers::pi * dist * dist * dist);
      continue;
    }
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const auto f = order_[i];
        w += triangle_winding(p, mesh_.vertex(f, 0), mesh_.vertex(f, 1), mesh_.vertex(f, 2));
      }
    } else {
      stack[top++] = node.right;
      stack[top++] = static_cast<std::uint32_t>(&node - nodes_.data()) + 1;
    }
  }
  return w;
}

double MeshQuery::winding_number_exact(const Vec3& p) const {
  double w = 0.0;
  for (std::uint32_t f = 0; f < mesh_.size(); ++f) {
    w += triangle_winding(p, mesh_.vertex(f, 0), mesh_.vertex(f, 1), mesh_.vertex(f, 2));
  }
  return w;
}

void MeshQuery::require_closed() const {
  if (!mesh_.watertight()) throw std::runtime_error("open mesh: signed distance undefined");
}

bool MeshQuery::inside(const Vec3& p) const {
  require_closed();
  if (!bounds().contains(p)) return false;
  return winding_number(p) > 0.5;
}

double MeshQuery::signed_distance(const Vec3& p) const {
  require_closed();
  const double d = closest_point(p).distance;
  return inside(p) ? -d : d;
}

std::vector<std::uint32_t> MeshQuery::faces_within(const Vec3& p, double radius) const {
  std::vector<std::uint32_t> out;
  const double r2 = radius * radius;
  std::uint32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.box.squared_distance(p) > r2) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const auto f = order_[i];
        const Vec3 q = closest_point_on_triangle(p, mesh_.vertex(f, 0), mesh_.vertex(f, 1), mesh_.vertex(f, 2));
        if ((q - p).squaredNorm() <= r2) out.push_back(f);
      }
    } else {
      stack[top++] = node.right;
      stack[top++] = static_cast<std::uint32_t>(&node - nodes_.data()) + 1;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace tacpose
