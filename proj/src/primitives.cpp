#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include "tacpose/mesh.hpp"

namespace tacpose::primitives {

namespace {

void add_quad(std::vector<Triangle>& tris, std::uint32_t a, std::uint32_t b, std::uint32_t c,
              std::uint32_t d) {
  tris.push_back({a, b, c});
  tris.push_back({a, c, d});
}

}  // namespace

TriMesh box(double size_x, double size_y, double size_z) {
  const Vec3 h(0.5 * size_x, 0.5 * size_y, 0.5 * size_z);
  std::vector<Vec3> v(8);
  for (int i = 0; i < 8; ++i) {
    v[i] = Vec3((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(), (i & 4) ? h.z() : -h.z());
  }
  std::vector<Triangle> t;
  add_quad(t, 0, 4, 6, 2);  // -x
  add_quad(t, 1, 3, 7, 5);  // +x
  add_quad(t, 0, 1, 5, 4);  // -y
  add_quad(t, 2, 6, 7, 3);  // +y
  add_quad(t, 0, 2, 3, 1);  // -z
  add_quad(t, 4, 5, 7, 6);  // +z
  return TriMesh::build(std::move(v), std::move(t));
}

TriMesh cube(double edge) { return box(edge, edge, edge); }

TriMesh cylinder(double radius, double height, int segments) {
  if (segments < 3) throw std::invalid_argument("cylinder needs >= 3 segments");
  const auto n = static_cast<std::uint32_t>(segments);
  std::vector<Vec3> v;
  v.reserve(2 * n + 2);
  for (std::uint32_t k = 0; k < n; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / n;
    v.emplace_back(radius * std::cos(phi), radius * std::sin(phi), -0.5 * height);
  }
  for (std::uint32_t k = 0; k < n; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / n;
    v.emplace_back(radius * std::cos(phi), radius * std::sin(phi), 0.5 * height);
  }
  const std::uint32_t bottom = 2 * n, top = 2 * n + 1;
  v.emplace_back(0.0, 0.0, -0.5 * height);
  v.emplace_back(0.0, 0.0, 0.5 * height);
  std::vector<Triangle> t;
  for (std::uint32_t k = 0; k < n; ++k) {
    const std::uint32_t k1 = (k + 1) % n;
    add_quad(t, k, k1, n + k1, n + k);
    t.push_back({top, n + k, n + k1});
    t.push_back({bottom, k1, k});
  }
  return TriMesh::build(std::move(v), std::move(t));
}

TriMesh icosphere(double radius, int subdivisions) {
  const double g = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, g, 0}, {1, g, 0},  {-1, -g, 0}, {1, -g, 0}, {0, -1, g},  {0, 1, g},
                         {0, -1, -g}, {0, 1, -g}, {g, 0, -1},  {g, 0, 1},  {-g, 0, -1}, {-g, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<Triangle> t = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> mid;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const auto idx = static_cast<std::uint32_t>(v.size() - 1);
      mid.emplace(key, idx);
      return idx;
    };
    std::vector<Triangle> next;
    next.reserve(4 * t.size());
    for (const auto& f : t) {
      const auto ab = midpoint(f[0], f[1]);
      const auto bc = midpoint(f[1], f[2]);
      const auto ca = midpoint(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    t = std::move(next);
  }
  for (auto& f : t) {
    const Vec3 n = (v[f[1]] - v[f[0]]).cross(v[f[2]] - v[f[0]]);
    if (n.dot(v[f[0]] + v[f[1]] + v[f[2]]) < 0.0) std::swap(f[1], f[2]);
  }
  for (auto& p : v) p *= radius;
  return TriMesh::build(std::move(v), std::move(t));
}

TriMesh l_bracket(double arm, double thickness, double depth) {
  if (!(thickness < arm)) throw std::invalid_argument("l_bracket thickness must be < arm");
  // Counter-clockwise L outline; vertex 3 is the reflex corner.
  const std::vector<Eigen::Vector2d> outline = {
      {0, 0}, {arm, 0}, {arm, thickness}, {thickness, thickness}, {thickness, arm}, {0, arm}};
  const auto n = static_cast<std::uint32_t>(outline.size());
  std::vector<Vec3> v;
  for (const auto& p : outline) v.emplace_back(p.x(), p.y(), 0.0);
  for (const auto& p : outline) v.emplace_back(p.x(), p.y(), depth);
  std::vector<Triangle> t;
  for (std::uint32_t k = 0; k < n; ++k) add_quad(t, k, (k + 1) % n, n + (k + 1) % n, n + k);
  // Fan from the reflex vertex covers the concave outline.
  for (std::uint32_t k : {4u, 5u, 0u, 1u}) {
    const std::uint32_t k1 = (k + 1) % n;
    t.push_back({n + 3, n + k, n + k1});
    t.push_back({3, k1, k});
  }
  const Vec3 center(0.5 * arm, 0.5 * arm, 0.5 * depth);
  for (auto& p : v) p -= center;
  return TriMesh::build(std::move(v), std::move(t));
}

TriMesh by_name(const std::string& name) {
  if (name == "cube") return cube(0.06);
  if (name == "box") return box(0.09, 0.06, 0.03);
  if (name == "cylinder") return cylinder(0.035, 0.10, 64);
  if (name == "sphere") return icosphere(0.04, 3);
  if (name == "lbracket") return l_bracket(0.06, 0.02, 0.04);
  throw std::invalid_argument("unknown primitive: " + name);
}

std::vector<std::string> suite_names() { return {"cube", "box", "cylinder", "sphere", "lbracket"}; }

}  // namespace tacpose::primitives
