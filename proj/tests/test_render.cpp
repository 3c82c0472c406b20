#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "tacpose/patch_io.hpp"
#include "tacpose/render.hpp"
#include "tacpose/rng.hpp"

using namespace tacpose;

namespace {

float max_diff(const TactilePatch& a, const TactilePatch& b) {
  REQUIRE(a.size() == b.size());
  float d = 0.0f;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.depth[i] - b.depth[i]));
  return d;
}

TriMesh mirrored_x(const TriMesh& m) {
  std::vector<Vec3> v = m.vertices();
  for (auto& p : v) p.x() = -p.x();
  std::vector<Triangle> t = m.triangles();
  for (auto& f : t) std::swap(f[1], f[2]);
  return TriMesh::build(std::move(v), std::move(t));
}

}  // namespace

TEST_CASE("sensor model validation") {
  SensorModel s;
  CHECK_NOTHROW(s.validate());
  s.pixels_u = 4;
  CHECK_THROWS(s.validate());
  s = {};
  s.max_indent = 0.0;
  CHECK_THROWS(s.validate());
  const SensorModel d;
  CHECK(d.pixel_center(0, 0).x() == doctest::Approx(-0.5 * d.gel_width + 0.5 * d.pitch_u()));
  CHECK(d.pixel_center(d.pixels_v - 1, d.pixels_u - 1).y() == doctest::Approx(0.5 * d.gel_height - 0.5 * d.pitch_v()));
}

TEST_CASE("place_sensor_at_sample examples") {
  const SensorModel s;
  SurfaceSample sample{Vec3(0.1, -0.2, 0.5), Vec3(0, 0, 1), 0, 0};
  const Pose full = place_sensor_at_sample(sample, s.max_indent, s);
  CHECK((full.translation - sample.position).norm() == 0.0);
  CHECK((full.rotation.col(2) - Vec3(0, 0, -1)).norm() < 1e-15);
  CHECK(full.is_valid());

  const Pose none = place_sensor_at_sample(sample, 0.0, s);
  CHECK((none.translation - (sample.position + Vec3(0, 0, s.max_indent))).norm() < 1e-15);
  const MeshQuery cube(primitives::cube(1.0));
  CHECK(render_patch(cube, none, s).empty_contact());

  SurfaceSample other{Vec3(-0.3, 0.2, 0.5), Vec3(0, 0, 1), 1, 1};
  CHECK(place_sensor_at_sample(other, 0.001, s).rotation == full.rotation);
  CHECK_THROWS(place_sensor_at_sample(sample, 2 * s.max_indent, s));
}

TEST_CASE("tangent convention") {
  const Vec3 n = Vec3(0.3, -0.4, 0.2).normalized();
  CHECK((tangent_axis(n) - n.cross(Vec3::UnitZ()).normalized()).norm() < 1e-15);
  CHECK((tangent_axis(Vec3(0, 0.1, 0.995).normalized()) - Vec3(0, 0.1, 0.995).normalized().cross(Vec3::UnitX()).normalized())
            .norm() < 1e-15);
}

TEST_CASE("face-on flat wall at full indent saturates every pixel") {
  const SensorModel s;
  const MeshQuery cube(primitives::cube(1.0));
  const auto p = render_patch(cube, place_sensor(Vec3(0, 0, 0.5), Vec3::UnitZ(), s.max_indent, s), s);
  for (float d : p.depth) REQUIRE(d == 1.0f);
  CHECK(p.contact_fraction() == 1.0);
  CHECK(p.saturated_fraction() == 1.0);
}

TEST_CASE("cube edge at half indent renders a band of width 2 indent") {
  const SensorModel s;
  const MeshQuery cube(primitives::cube(1.0));
  const double indent = 0.5 * s.max_indent;
  const Vec3 n = Vec3(0, 1, 1).normalized();
  const auto p = render_patch(cube, place_sensor(Vec3(0, 0.5, 0.5), n, indent, s), s);
  // The edge runs along world x = local x, so the band spans rows.
  for (int u : {0, s.pixels_u / 2, s.pixels_u - 1}) {
    int rows = 0;
    for (int v = 0; v < s.pixels_v; ++v) rows += p.at(v, u) > 0.0f ? 1 : 0;
    CHECK(std::abs(rows * s.pitch_v() - 2.0 * indent / std::tan(std::numbers::pi / 4)) <= s.pitch_v());
  }
}

TEST_CASE("sphere pressed 1 mm shows the spherical-cap disc") {
  SensorModel s;
  s.gel_width = s.gel_height = 0.04;
  s.pixels_u = s.pixels_v = 200;
  const MeshQuery sphere(primitives::icosphere(0.1, 5));
  const auto p = render_patch(sphere, place_sensor(Vec3(0, 0.1, 0), Vec3::UnitY(), 0.001, s), s);
  double radius = 0.0;
  for (int v = 0; v < s.pixels_v; ++v) {
    for (int u = 0; u < s.pixels_u; ++u) {
      if (p.at(v, u) > 0.0f) radius = std::max(radius, s.pixel_center(v, u).norm());
    }
  }
  CHECK(std::abs(radius - std::sqrt(2 * 0.1 * 0.001)) <= s.pitch_u());
}

TEST_CASE("gel origin inside the object reads full depth") {
  const SensorModel s;
  const MeshQuery cube(primitives::cube(1.0));
  Pose deep = place_sensor(Vec3(0, 0, 0.5), Vec3::UnitZ(), s.max_indent, s);
  deep.translation.z() -= 0.01;
  const auto p = render_patch(cube, deep, s);
  for (float d : p.depth) REQUIRE(d == 1.0f);
}

TEST_CASE("render is translation equivariant") {
  const SensorModel s;
  const auto mesh = primitives::by_name("cylinder");
  const Vec3 shift(0.25, -0.5, 0.125);
  Pose t;
  t.translation = shift;
  const MeshQuery a(mesh), b(mesh.transformed(t));
  const auto samples = sample_surface(mesh, 10, 3);
  for (const auto& x : samples) {
    const Pose p = place_sensor_at_sample(x, 0.8 * s.max_indent, s);
    Pose q = p;
    q.translation += shift;
    CHECK(max_diff(render_patch(a, p, s), render_patch(b, q, s)) < 1e-6f);
  }
}

TEST_CASE("depth is monotone in indent") {
  const SensorModel s;
  const MeshQuery q(primitives::by_name("lbracket"));
  for (const auto& x : sample_surface(q.mesh(), 8, 4)) {
    TactilePatch prev;
    for (double f : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      auto p = render_patch(q, place_sensor_at_sample(x, f * s.max_indent, s), s);
      if (!prev.depth.empty()) {
        for (std::size_t i = 0; i < p.size(); ++i) REQUIRE(p.depth[i] >= prev.depth[i] - 1e-6f);
      }
      prev = std::move(p);
    }
  }
}

TEST_CASE("mirrored scene gives the mirrored patch") {
  const SensorModel s;
  const auto mesh = primitives::by_name("lbracket");
  const MeshQuery a(mesh), b(mirrored_x(mesh));
  for (const auto& x : sample_surface(mesh, 12, 5)) {
    SurfaceSample m = x;
    m.position.x() = -m.position.x();
    m.normal.x() = -m.normal.x();
    const auto pa = render_patch(a, place_sensor_at_sample(x, s.max_indent, s), s);
    const auto pb = render_patch(b, place_sensor_at_sample(m, s.max_indent, s), s);
    // With the +x reference axis the reflection flips the gel's y axis instead.
    const bool polar = std::abs(x.normal.z()) > 0.99;
    const TactilePatch expected = polar ? pa.mirrored_u().rotated_180() : pa.mirrored_u();
    CHECK(max_diff(expected, pb) < 1e-6f);
  }
}

TEST_CASE("batch rendering matches the serial loop") {
  const SensorModel s;
  const MeshQuery q(primitives::by_name("box"));
  std::vector<Pose> placements;
  for (const auto& x : sample_surface(q.mesh(), 24, 6)) placements.push_back(place_sensor_at_sample(x, s.max_indent, s));
  const auto a = render_patches(q, placements, s), b = render_patches_serial(q, placements, s);
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i].depth == b[i].depth);
}

TEST_CASE("patch helpers") {
  TactilePatch p(8, 8);
  CHECK(p.is_valid());
  CHECK(p.empty_contact());
  CHECK(p.saturated_fraction() == 0.0);
  p.at(0, 0) = 1.0f;
  p.at(0, 1) = 0.96f;
  p.at(7, 7) = 0.5f;
  CHECK(p.max_depth() == 1.0f);
  CHECK(p.contact_fraction() == doctest::Approx(3.0 / 64));
  CHECK(p.saturated_fraction() == doctest::Approx(2.0 / 64));
  CHECK(p.rotated_180().at(7, 7) == 1.0f);
  CHECK(p.mirrored_u().at(0, 7) == 1.0f);
  const auto d = p.downsampled();
  CHECK(d.pixels_u == 4);
  CHECK(d.at(0, 0) == doctest::Approx(0.49f));
  p.at(3, 3) = 1.5f;
  CHECK_FALSE(p.is_valid());
}

TEST_CASE("TPAT round trip and header") {
  const auto path = std::filesystem::temp_directory_path() / "tacpose_test_patch.tpat";
  TactilePatch p(10, 9);
  Philox r(8);
  for (auto& d : p.depth) d = static_cast<float>(r.uniform());
  write_tpat(path, p);
  CHECK(std::filesystem::file_size(path) == 16 + 4 * 90);
  const auto back = read_tpat(path);
  CHECK(back.pixels_u == 10);
  CHECK(back.pixels_v == 9);
  CHECK(back.depth == p.depth);
  std::ofstream(path, std::ios::binary) << "NOPE";
  CHECK_THROWS(read_tpat(path));
}
