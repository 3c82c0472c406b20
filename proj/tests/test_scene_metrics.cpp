#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "tacpose/config.hpp"
#include "tacpose/experiment.hpp"
#include "tacpose/metrics.hpp"
#include "tacpose/rng.hpp"

using namespace tacpose;

namespace {

Pose shifted(const Pose& p, const Vec3& d) {
  Pose q = p;
  q.translation += d;
  return q;
}

Pose rotated(const Pose& p, const Vec3& axis_angle) {
  Pose q = p;
  q.rotation = p.rotation * rodrigues(axis_angle);
  return q;
}

PatchShape shape_at(const MeshQuery& mesh, const Vec3& point, const Vec3& normal, const SensorModel& s) {
  const auto touching = place_sensor_touching(mesh, point, normal, s.max_indent, s);
  REQUIRE(touching.has_value());
  const auto wide = widened_sensor(s);
  return classify_patch(render_patch(mesh, *touching, wide), wide);
}

}  // namespace

TEST_CASE("contact class names") {
  for (auto c : {ContactClass::flat, ContactClass::edge, ContactClass::corner, ContactClass::curved,
                 ContactClass::none}) {
    CHECK(contact_class_from_string(to_string(c)) == c);
  }
  CHECK_THROWS(contact_class_from_string("round"));
}

TEST_CASE("local geometry on primitives") {
  const MeshQuery cube(primitives::cube(0.06));
  const auto face = analyze_local_geometry(cube, Vec3(0.01, -0.005, 0.03));
  CHECK(face.cls == ContactClass::flat);
  CHECK((face.normal - Vec3::UnitZ()).norm() < 1e-12);
  const auto edge = analyze_local_geometry(cube, Vec3(0.03, 0.0, 0.03));
  CHECK(edge.cls == ContactClass::edge);
  CHECK(edge.clusters == 2);
  CHECK((edge.normal - Vec3(1, 0, 1).normalized()).norm() < 1e-12);
  const auto corner = analyze_local_geometry(cube, Vec3(0.03, 0.03, 0.03));
  CHECK(corner.cls == ContactClass::corner);
  CHECK(corner.clusters == 3);

  const MeshQuery sphere(primitives::by_name("sphere"));
  const auto s = analyze_local_geometry(sphere, sphere.closest_point(Vec3(0.3, 0.2, 0.1)).point);
  CHECK(s.cls == ContactClass::curved);
  const MeshQuery cyl(primitives::by_name("cylinder"));
  CHECK(analyze_local_geometry(cyl, cyl.closest_point(Vec3(1, 0.3, 0)).point).cls == ContactClass::curved);
  CHECK(analyze_local_geometry(cyl, Vec3(0.0, 0.01, 0.05)).cls == ContactClass::flat);
}

TEST_CASE("patch classifier on rendered contacts") {
  const SensorModel s;
  const MeshQuery cube(primitives::cube(0.06));
  CHECK(shape_at(cube, Vec3(0, 0, 0.03), Vec3::UnitZ(), s).cls == ContactClass::flat);
  CHECK(shape_at(cube, Vec3(0.03, 0, 0.03), Vec3(1, 0, 1).normalized(), s).cls == ContactClass::edge);
  CHECK(shape_at(cube, Vec3(0.03, 0.03, 0.03), Vec3(1, 1, 1).normalized(), s).cls == ContactClass::corner);
  const MeshQuery sphere(primitives::by_name("sphere"));
  const Vec3 n = Vec3(0.2, -0.5, 0.7).normalized();
  CHECK(shape_at(sphere, sphere.closest_point(n).point, n, s).cls == ContactClass::curved);
  CHECK(classify_patch(TactilePatch(s.pixels_u, s.pixels_v), s).cls == ContactClass::none);
  CHECK(widened_sensor(s).max_indent == doctest::Approx(s.max_indent + 0.002));
}

TEST_CASE("touching placement reaches the requested indent") {
  const SensorModel s;
  const MeshQuery sphere(primitives::by_name("sphere"));
  for (double frac : {0.6, 0.8, 1.0}) {
    const Vec3 n = Vec3(-0.3, 0.1, 0.9).normalized();
    const auto p = place_sensor_touching(sphere, sphere.closest_point(n).point, n, frac * s.max_indent, s);
    REQUIRE(p.has_value());
    CHECK(render_patch(sphere, *p, s).max_depth() == doctest::Approx(frac).epsilon(1e-5));
  }
  CHECK_FALSE(place_sensor_touching(sphere, Vec3(1, 0, 0), Vec3(0, 0, 1), s.max_indent, s).has_value());
}

TEST_CASE("cube scene: saturation ordered flat > edge > corner") {
  const SensorModel s;
  const MeshQuery cube(primitives::cube(0.06));
  const std::vector<ContactClass> spec = {ContactClass::flat, ContactClass::edge, ContactClass::corner};
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    const auto scene = make_scene(cube, "cube", spec, seed, s);
    REQUIRE(scene.size() == 3);
    CHECK(scene.labels == spec);
    const double f = scene.sensors[0].patch.saturated_fraction();
    const double e = scene.sensors[1].patch.saturated_fraction();
    const double c = scene.sensors[2].patch.saturated_fraction();
    CHECK(f > e);
    CHECK(e > c);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK_FALSE(scene.sensors[i].patch.empty_contact());
      for (std::size_t k = 0; k < i; ++k) {
        CHECK((scene.sensors[i].position() - scene.sensors[k].position()).norm() >= 0.02);
      }
      CHECK(std::abs(cube.signed_distance(scene.contact_points[i])) < 1e-9);
    }
    REQUIRE(scene.ground_truth.has_value());
    CHECK(scene.ground_truth->is_valid());
    CHECK(scene.ground_truth->translation.cwiseAbs().maxCoeff() <= 0.2);
  }
}

TEST_CASE("sphere scene: centered disc") {
  const SensorModel s;
  // Fine tessellation, so facets do not shift the footprint.
  const MeshQuery sphere(primitives::icosphere(0.04, 5));
  const std::vector<ContactClass> spec = {ContactClass::curved};
  const auto scene = make_scene(sphere, "sphere", spec, 9, s);
  const auto& p = scene.sensors[0].patch;
  double n = 0.0, cu = 0.0, cv = 0.0;
  for (int v = 0; v < p.pixels_v; ++v) {
    for (int u = 0; u < p.pixels_u; ++u) {
      if (p.at(v, u) <= kContactThreshold) continue;
      n += 1;
      cu += u + 0.5;
      cv += v + 0.5;
    }
  }
  REQUIRE(n > 0);
  // The disc sits under the sphere center, which projects near the gel center.
  const Vec3 c = scene.sensors[0].pose.inverse().apply(scene.ground_truth->translation);
  const double pu = (c.x() + 0.5 * s.gel_width) / s.pitch_u(), pv = (c.y() + 0.5 * s.gel_height) / s.pitch_v();
  CHECK(std::abs(cu / n - pu) < 1.0);
  CHECK(std::abs(cv / n - pv) < 1.0);
  CHECK(std::abs(pu - 0.5 * p.pixels_u) < 0.15 * p.pixels_u);
  CHECK(std::abs(pv - 0.5 * p.pixels_v) < 0.15 * p.pixels_v);
  // The gel corners lie outside the disc.
  CHECK(p.at(0, 0) == 0.0f);
  CHECK(p.at(0, p.pixels_u - 1) == 0.0f);
  CHECK(p.at(p.pixels_v - 1, 0) == 0.0f);
  CHECK(p.at(p.pixels_v - 1, p.pixels_u - 1) == 0.0f);
}

TEST_CASE("scenes are deterministic and report missing classes") {
  const SensorModel s;
  const MeshQuery box(primitives::by_name("box"));
  const auto spec = default_contacts("box", 1);
  const auto a = make_scene(box, "box", spec, 33, s), b = make_scene(box, "box", spec, 33, s);
  REQUIRE(a.size() == b.size());
  CHECK(a.ground_truth->translation == b.ground_truth->translation);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.sensors[i].pose.rotation == b.sensors[i].pose.rotation);
    CHECK(a.sensors[i].pose.translation == b.sensors[i].pose.translation);
    CHECK(a.sensors[i].patch.depth == b.sensors[i].patch.depth);
  }
  const auto c = make_scene(box, "box", spec, 34, s);
  CHECK(c.ground_truth->translation != a.ground_truth->translation);

  const MeshQuery sphere(primitives::by_name("sphere"));
  const std::vector<ContactClass> corner = {ContactClass::corner};
  CHECK_THROWS_WITH(make_scene(sphere, "sphere", corner, 1, s), "contact class 'corner' not present on mesh");

  const auto pre = a.prefix(2);
  CHECK(pre.size() == 2);
  CHECK(pre.labels.size() == 2);
  CHECK(pre.sensors[1].patch.depth == a.sensors[1].patch.depth);
}

TEST_CASE("default contacts") {
  CHECK(default_contacts("sphere", 0) ==
        std::vector<ContactClass>{ContactClass::curved, ContactClass::curved, ContactClass::curved});
  CHECK(default_contacts("cube", 0) ==
        std::vector<ContactClass>{ContactClass::flat, ContactClass::edge, ContactClass::corner});
  CHECK(default_contacts("cube", 1) ==
        std::vector<ContactClass>{ContactClass::edge, ContactClass::corner, ContactClass::flat});
  CHECK(default_contacts("cylinder", 0).size() == 3);
  CHECK(default_contacts("cube", 0, 2).size() == 2);
}

TEST_CASE("contact accuracy") {
  const SensorModel s;
  for (const auto& name : primitives::suite_names()) {
    const MeshQuery mesh(primitives::by_name(name));
    const auto scene = make_scene(mesh, name, default_contacts(name, 0), 5, s);
    CHECK_MESSAGE(contact_accuracy(mesh, scene, *scene.ground_truth, s), name);
    CHECK_FALSE(contact_accuracy(mesh, scene, shifted(*scene.ground_truth, Vec3(0.1, 0, 0)), s));
  }
}

TEST_CASE("positional error") {
  const Pose gt = exp_map(Twist(Vec3(0.1, 0.2, -0.1), Vec3(0.3, 0, 0)));
  CHECK(positional_error_cm(gt, gt) == 0.0);
  CHECK(positional_error_cm(shifted(gt, Vec3(0.01, 0, 0)), gt) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("auc of adi") {
  CHECK(auc_of_adi(0.0) == 100.0);
  CHECK(auc_of_adi(1e-15) == 100.0);
  CHECK(auc_of_adi(1e-9) == 99.5);
  CHECK(auc_of_adi(0.05) == 0.0);
  CHECK(auc_of_adi(0.02) == doctest::Approx(0.5).epsilon(1e-12));  // only the last sample counts, half weight
  // Independent sum: trapezoid over the step indicator.
  for (double a : {0.0031, 0.01, 0.0155, 0.0199}) {
    double area = 0.0;
    for (int k = 0; k < kAucSteps; ++k) {
      const double t0 = 0.02 * k / kAucSteps, t1 = 0.02 * (k + 1) / kAucSteps;
      area += 0.5 * ((a <= t0 ? 1.0 : 0.0) + (a <= t1 ? 1.0 : 0.0)) / kAucSteps;
    }
    CHECK(auc_of_adi(a) == doctest::Approx(100.0 * area).epsilon(1e-12));
  }
}

TEST_CASE("adi examples") {
  const auto cube_mesh = primitives::cube(0.06);
  const auto pts = model_points(cube_mesh);
  CHECK(pts.size() == cube_mesh.vertices().size());
  const Pose gt = exp_map(Twist(Vec3(0.05, -0.1, 0.2), Vec3(0.4, -0.3, 1.1)));
  CHECK(adi(gt, gt, pts) == 0.0);
  CHECK(adi_auc(gt, gt, pts) == 100.0);
  CHECK(adi_auc(shifted(gt, Vec3(0.05, 0, 0)), gt, pts) == 0.0);
  CHECK(adi_auc_brute_force(shifted(gt, Vec3(0.05, 0, 0)), gt, pts) == 0.0);
  // Cube symmetry: a quarter turn about a face axis.
  const Pose quarter = rotated(gt, Vec3(0, 0, std::numbers::pi / 2));
  CHECK(adi(quarter, gt, pts) < 1e-9);
  CHECK(adi_auc(quarter, gt, pts) == 100.0);

  // Icosphere symmetry: the cyclic coordinate permutation maps the vertex set to itself.
  const auto ico = primitives::icosphere(0.04, 2);
  const auto ip = model_points(ico);
  REQUIRE(ip.size() == ico.vertices().size());
  const Vec3 axis = Vec3(1, 1, 1).normalized() * (2 * std::numbers::pi / 3);
  const Pose turned = shifted(rotated(gt, axis), Vec3(0.03, 0, 0));
  CHECK(adi_auc(turned, gt, ip, true) == 100.0);
  CHECK(adi_auc(turned, gt, ip, false) < 100.0);

  const auto big = model_points(primitives::by_name("sphere"), 512);
  CHECK(big.size() == 512);
}

TEST_CASE("adi agrees with brute force") {
  Philox r(3);
  for (const auto& name : primitives::suite_names()) {
    const auto pts = model_points(primitives::by_name(name));
    for (int i = 0; i < 6; ++i) {
      const Pose gt = exp_map(Twist(Vec3(r.normal(), r.normal(), r.normal()) * 0.1,
                                    Vec3(r.normal(), r.normal(), r.normal())));
      const Pose est = exp_map(Twist(gt.translation + Vec3(r.normal(), r.normal(), r.normal()) * 0.01,
                                     Vec3(r.normal(), r.normal(), r.normal())));
      CHECK(adi(est, gt, pts) == doctest::Approx(adi_brute_force(est, gt, pts)).epsilon(1e-12));
      CHECK(std::abs(adi_auc(est, gt, pts) - adi_auc_brute_force(est, gt, pts)) < 1e-9);
      CHECK(std::abs(adi_auc(est, gt, pts, true) - adi_auc_brute_force(est, gt, pts, true)) < 1e-9);
    }
  }
}

TEST_CASE("config readers") {
  const auto p = pipeline_from_json(Json::parse(
      R"({"selection": {"mode": "baseline", "delta_h": 0.05, "metric": "cosine"},
          "filter": {"n_max": 100}, "gd": {"k_max": 50, "gains": {"rotation": 0.5}},
          "rank": {"grid": [4, 4, 2]}, "top_k": 3, "seed": 11})"));
  CHECK(p.selection.mode == Mode::baseline);
  CHECK(*p.selection.delta_h == 0.05);
  CHECK(p.selection.metric == FeatureMetric::cosine);
  CHECK(p.filter.n_max == 100);
  CHECK(p.filter.delta_d0 == 0.05);
  CHECK(p.gd.k_max == 50);
  CHECK(p.gd.gain_rotation == 0.5);
  CHECK(p.gd.gain_translation == 1e-2);
  CHECK(p.rank.grid.nz == 2);
  CHECK(p.top_k == 3);
  const auto back = pipeline_from_json(to_json(p));
  CHECK(to_json(back).dump() == to_json(p).dump());
  CHECK_FALSE(pipeline_from_json(Json::parse(R"({"selection": {"delta_h": null}})")).selection.delta_h);

  CHECK_THROWS_WITH(pipeline_from_json(Json::parse(R"({"filtre": {}})")), "pipeline: unknown key 'filtre'");
  CHECK_THROWS(pipeline_from_json(Json::parse(R"({"gd": {"k_max": 0}})")));
  CHECK_THROWS(sensor_from_json(Json::parse(R"({"pixels_u": 2})")));
  CHECK_THROWS(mode_from_string("fast"));
  CHECK(gd_from_json(Json::parse(R"({"l_s": 0})")).l_s == 0.0);

  const Pose x = exp_map(Twist(Vec3(0.1, -0.2, 0.3), Vec3(2.0, -0.5, 0.25)));
  const Pose y = pose_from_json(pose_to_json(x));
  CHECK((y.rotation - x.rotation).norm() < 1e-12);
  CHECK(y.translation == x.translation);
  CHECK_THROWS(pose_from_json(Json::parse(R"({"position": [0,0,0], "quaternion": [2,0,0,0]})")));

  const auto e = experiment_from_json(Json::parse(R"({"objects": ["cube"], "sensor_counts": [1, 3]})"));
  CHECK(e.objects == std::vector<std::string>{"cube"});
  CHECK(e.sensor_counts == std::vector<std::size_t>{1, 3});
  CHECK_THROWS(experiment_from_json(Json::parse(R"({"objcts": []})")));
  CHECK(to_json(experiment_from_json(to_json(e))).dump() == to_json(e).dump());
}

TEST_CASE("scene files round trip") {
  const SensorModel s;
  const MeshQuery cube(primitives::cube(0.06));
  const auto scene = make_scene(cube, "cube", default_contacts("cube", 0), 3, s);
  const auto dir = std::filesystem::temp_directory_path() / "tacpose_test_scene";
  std::filesystem::create_directories(dir);
  write_scene(dir / "scene.json", scene, s);
  CHECK(std::filesystem::exists(dir / "scene.s2.tpat"));
  const auto back = read_scene(dir / "scene.json");
  CHECK(back.object == "cube");
  REQUIRE(back.size() == 3);
  CHECK(back.labels == scene.labels);
  CHECK((back.ground_truth->translation - scene.ground_truth->translation).norm() < 1e-15);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.sensors[i].patch.depth == scene.sensors[i].patch.depth);
    CHECK((back.sensors[i].pose.rotation - scene.sensors[i].pose.rotation).norm() < 1e-12);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("experiment reports are deterministic and order independent") {
  ExperimentConfig cfg;
  cfg.objects = {"cube", "cylinder"};
  cfg.scenes_per_object = 2;
  cfg.sensor_counts = {2, 3};
  cfg.db_size = 120;
  cfg.pipeline.gd.k_max = 60;
  cfg.pipeline.filter.n_max = 100;
  const auto a = run_experiment(cfg);
  const auto b = run_experiment(cfg);
  CHECK(a.to_json().dump() == b.to_json().dump());
  CHECK(a.records.size() == 2 * 2 * 2 * 2);
  const auto j = a.to_json();
  CHECK(j["schema_version"] == kReportSchema);
  CHECK_FALSE(j["scenes"][0].contains("seconds"));

  for (const auto& r : a.records) {
    if (!r.ok || r.mode != Mode::baseline) continue;
    for (auto n : r.omega_sizes) CHECK(n == cfg.db_size);
  }
  auto recs = a.select(Mode::ours, 3);
  CHECK(recs.size() == 4);
  const auto agg = aggregate(recs);
  std::reverse(recs.begin(), recs.end());
  std::swap(recs[0], recs[2]);
  const auto agg2 = aggregate(recs);
  CHECK(agg.best_mean.position_cm == agg2.best_mean.position_cm);
  CHECK(agg.top_mean.adi_auc == agg2.top_mean.adi_auc);
  CHECK(agg.best_median_position_cm == agg2.best_median_position_cm);
  CHECK(agg.scenes + agg.failures == 4);

  const auto md = a.markdown();
  CHECK(md.find("### 2 sensors") != std::string::npos);
  CHECK(md.find("| cylinder | baseline |") != std::string::npos);
}
