#include "tacpose/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "tacpose/rng.hpp"

namespace tacpose {

TriMesh TriMesh::build(std::vector<Vec3> vertices, std::vector<Triangle> triangles) {
  TriMesh mesh;
  mesh.vertices_ = std::move(vertices);
  const auto nv = static_cast<std::uint32_t>(mesh.vertices_.size());
  mesh.triangles_.reserve(triangles.size());
  for (const auto& t : triangles) {
    if (t[0] >= nv || t[1] >= nv || t[2] >= nv) {
      throw std::runtime_error("triangle index out of range");
    }
    const Vec3 c = (mesh.vertices_[t[1]] - mesh.vertices_[t[0]])
                       .cross(mesh.vertices_[t[2]] - mesh.vertices_[t[0]]);
    const double twice_area = c.norm();
    if (!(twice_area > 0.0) || !std::isfinite(twice_area)) {
      ++mesh.dropped_degenerate_;
      continue;
    }
    mesh.triangles_.push_back(t);
    mesh.face_normals_.push_back(c / twice_area);
    mesh.face_areas_.push_back(0.5 * twice_area);
  }

  // Closed and consistently oriented: each directed edge (a, b) occurs once
  // and its reverse (b, a) occurs once.
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> directed;
  bool ok = !mesh.triangles_.empty();
  for (const auto& t : mesh.triangles_) {
    for (int k = 0; k < 3 && ok; ++k) {
      if (++directed[{t[k], t[(k + 1) % 3]}] > 1) ok = false;
    }
  }
  if (ok) {
    for (const auto& [edge, count] : directed) {
      if (!directed.contains({edge.second, edge.first})) {
        ok = false;
        break;
      }
    }
  }
  mesh.watertight_ = ok;
  return mesh;
}

Aabb TriMesh::bounds() const {
  Aabb b;
  for (const auto& t : triangles_) {
    for (int k = 0; k < 3; ++k) b.extend(vertices_[t[k]]);
  }
  return b;
}

double TriMesh::total_area() const {
  double a = 0.0;
  for (double x : face_areas_) a += x;
  return a;
}

TriMesh TriMesh::transformed(const Pose& pose) const {
  std::vector<Vec3> v(vertices_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = pose.apply(vertices_[i]);
  return build(std::move(v), triangles_);
}

TriMesh TriMesh::scaled(double factor) const {
  std::vector<Vec3> v(vertices_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = factor * vertices_[i];
  return build(std::move(v), triangles_);
}

std::vector<SurfaceSample> sample_surface(const TriMesh& mesh, std::size_t m, std::uint64_t seed,
                                          bool farthest_point) {
  if (mesh.empty()) throw std::runtime_error("degenerate mesh");
  if (m == 0) throw std::invalid_argument("sample count must be >= 1");

  std::vector<double> cdf(mesh.size());
  double acc = 0.0;
  for (std::size_t f = 0; f < mesh.size(); ++f) {
    acc += mesh.face_areas()[f];
    cdf[f] = acc;
  }

  const std::size_t draw = farthest_point ? 4 * m : m;
  Philox rng(seed, 0x5A4D);
  std::vector<SurfaceSample> samples(draw);
  for (std::size_t i = 0; i < draw; ++i) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const auto face = static_cast<std::uint32_t>(
        std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(mesh.size()) - 1));
    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    const Vec3& a = mesh.vertex(face, 0);
    const Vec3& b = mesh.vertex(face, 1);
    const Vec3& c = mesh.vertex(face, 2);
    samples[i].position = (1.0 - r1) * a + r1 * (1.0 - r2) * b + r1 * r2 * c;
    samples[i].normal = mesh.face_normals()[face];
    samples[i].face_id = face;
  }

  if (farthest_point) {
    std::vector<Vec3> pts(draw);
    for (std::size_t i = 0; i < draw; ++i) pts[i] = samples[i].position;
    const auto keep = farthest_point_indices(pts, m);
    std::vector<SurfaceSample> thinned;
    thinned.reserve(m);
    for (auto k : keep) thinned.push_back(samples[k]);
    samples = std::move(thinned);
  }
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i].sample_id = static_cast<std::uint32_t>(i);
  return samples;
}

std::vector<std::size_t> farthest_point_indices(std::span<const Vec3> points, std::size_t k,
                                                std::size_t start) {
  std::vector<std::size_t> out;
  if (points.empty() || k == 0) return out;
  k = std::min(k, points.size());
  std::vector<double> best(points.size(), std::numeric_limits<double>::infinity());
  std::size_t current = std::min(start, points.size() - 1);
  out.reserve(k);
  for (std::size_t n = 0; n < k; ++n) {
    out.push_back(current);
    std::size_t next = current;
    double far = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      best[i] = std::min(best[i], (points[i] - points[current]).squaredNorm());
      if (best[i] > far) {
        far = best[i];
        next = i;
      }
    }
    current = next;
  }
  return out;
}

}  // namespace tacpose
