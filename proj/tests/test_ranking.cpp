#include <doctest.h>

#include <cmath>

#include <omp.h>

#include "tacpose/ranking.hpp"
#include "tacpose/rng.hpp"

using namespace tacpose;

namespace {

// Sensor facing the +z face of a cube of half-size `half`, its shallowest proxy
// layer `depth` below the face.
Pose pressed_into_top(double half, double depth, const SensorModel& s, const ProxyGrid& g, const Vec3& offset = Vec3::Zero()) {
  const double first_layer = 0.5 / g.nz * s.proxy_thickness;
  Pose p;
  p.rotation = Vec3(1, 0, 0).asDiagonal();
  p.rotation(1, 1) = -1.0;
  p.rotation(2, 2) = -1.0;  // local +z points to world -z
  p.translation = Vec3(offset.x(), offset.y(), half - depth - first_layer);
  return p;
}

TupleEstimate estimate_at(const Pose& pose, double loss, std::size_t index) {
  TupleEstimate e;
  e.pose = pose;
  e.xi = twist_of(pose);
  e.loss = loss;
  e.tuple_index = index;
  e.valid = true;
  return e;
}

}  // namespace

TEST_CASE("proxy points fill the sensor body behind the gel") {
  const SensorModel s;
  const auto pts = proxy_points(s);
  CHECK(pts.size() == 1024);
  for (const auto& p : pts) {
    CHECK(p.z() < 0.0);
    CHECK(p.z() > -s.proxy_thickness);
    CHECK(std::abs(p.x()) < 0.5 * s.gel_width);
    CHECK(std::abs(p.y()) < 0.5 * s.gel_height);
  }
  CHECK_THROWS(proxy_points(s, {0, 4, 4}));
}

TEST_CASE("penetration: disjoint, face and open-mesh cases") {
  const SensorModel s;
  const ProxyGrid g;
  const MeshQuery cube(primitives::cube(0.06));
  Pose far;
  far.translation = Vec3(1, 0, 0);
  CHECK(penetration_depth(cube, Pose::identity(), s, far) == 0.0);
  CHECK(penetration_depth(cube, Pose::identity(), s, pressed_into_top(0.03, -0.001, s, g)) == 0.0);
  for (double d : {1e-4, 1e-3, 4e-3}) {
    const Pose p = pressed_into_top(0.03, d, s, g);
    CHECK(penetration_depth(cube, Pose::identity(), s, p) == doctest::Approx(d).epsilon(1e-9));
    CHECK(penetration_depth_reference(cube, Pose::identity(), s, p) == doctest::Approx(d).epsilon(1e-9));
  }
  // Moving object and sensor together changes nothing.
  const Pose m = exp_map(Twist(Vec3(0.3, -0.1, 0.2), Vec3(0.5, 1.0, -0.4)));
  const Pose p = pressed_into_top(0.03, 2e-3, s, g);
  CHECK(penetration_depth(cube, m, s, m.compose(p)) == doctest::Approx(2e-3).epsilon(1e-9));

  const auto open = TriMesh::build({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}, {{0, 1, 2}});
  const MeshQuery q(open);
  CHECK_THROWS_WITH(penetration_depth(q, Pose::identity(), s, far), "open mesh: signed distance undefined");
}

TEST_CASE("penetration into a sphere within grid resolution") {
  const SensorModel s;
  const double r = 0.1;
  const MeshQuery sphere(primitives::icosphere(r, 5));
  for (double delta : {0.002, 0.005, 0.008}) {
    // Gel plane at distance r - delta from the center, facing it.
    const Pose p = place_sensor(Vec3(0, 0, r - delta), Vec3::UnitZ(), s.max_indent, s);
    const double d = penetration_depth(sphere, Pose::identity(), s, p);
    CHECK(std::abs(d - delta) <= s.proxy_thickness / 4);
  }
}

TEST_CASE("penetration matches the brute-force reference") {
  const SensorModel s;
  const MeshQuery cube(primitives::cube(1.0));
  Philox r(3);
  // Proxy entirely inside the unit cube.
  for (int i = 0; i < 10; ++i) {
    const Pose p = exp_map(Twist(Vec3(r.uniform(-0.4, 0.4), r.uniform(-0.4, 0.4), r.uniform(-0.4, 0.4)),
                                 Vec3(r.normal(), r.normal(), r.normal())));
    const double fast = penetration_depth(cube, Pose::identity(), s, p);
    const double ref = penetration_depth_reference(cube, Pose::identity(), s, p);
    CHECK(fast == doctest::Approx(ref).epsilon(1e-12));
    double deepest = 0.0;
    for (const auto& x : proxy_points(s)) {
      const Vec3 w = p.apply(x);
      deepest = std::max(deepest, 0.5 - w.cwiseAbs().maxCoeff());
    }
    CHECK(fast == doctest::Approx(deepest).epsilon(1e-9));
  }
  // Random poses straddling the surface of the suite objects.
  for (const char* name : {"lbracket", "cylinder", "box"}) {
    const MeshQuery q(primitives::by_name(name));
    for (const auto& x : sample_surface(q.mesh(), 15, 21)) {
      const Pose p = place_sensor(x.position - 0.004 * x.normal, x.normal, s.max_indent, s);
      CHECK(penetration_depth(q, Pose::identity(), s, p) ==
            doctest::Approx(penetration_depth_reference(q, Pose::identity(), s, p)).epsilon(1e-12));
    }
  }
}

TEST_CASE("rank score arithmetic") {
  const SensorModel s;
  const ProxyGrid g;
  const MeshQuery cube(primitives::cube(0.06));
  const std::vector<SensorObservation> obs = {
      {pressed_into_top(0.03, -0.002, s, g), {}},
      {pressed_into_top(0.03, 1e-3, s, g, Vec3(0.005, 0, 0)), {}},
      {pressed_into_top(0.03, 2e-4, s, g, Vec3(0, -0.004, 0)), {}},
  };
  const std::vector<TupleEstimate> est = {estimate_at(Pose::identity(), 4e-4, 0)};
  const auto ranked = rank(est, obs, cube, s);
  REQUIRE(ranked.size() == 1);
  CHECK(ranked[0].max_penetration == doctest::Approx(1e-3).epsilon(1e-9));
  CHECK(ranked[0].score == doctest::Approx(1.4e-3).epsilon(1e-9));
  CHECK(ranked[0].final_loss == 4e-4);

  RankConfig cfg;
  cfg.penetration_weight = 0.5;
  CHECK(rank(est, obs, cube, s, cfg)[0].score == doctest::Approx(9e-4).epsilon(1e-9));
}

TEST_CASE("rank ordering") {
  const SensorModel s;
  const ProxyGrid g;
  const MeshQuery cube(primitives::cube(0.06));
  const std::vector<SensorObservation> obs = {{pressed_into_top(0.03, 0.0, s, g), {}}};
  Pose sunk;
  sunk.translation = Vec3(0, 0, 5e-3);  // object raised 5 mm into the sensor
  Pose clear;
  clear.translation = Vec3(0, 0, -5e-3);

  const std::vector<TupleEstimate> two = {estimate_at(sunk, 1e-4, 0), estimate_at(clear, 1e-4, 1)};
  const auto r = rank(two, obs, cube, s);
  CHECK(r[0].tuple_index == 1);
  CHECK(r[0].max_penetration == 0.0);
  CHECK(r[1].max_penetration == doctest::Approx(5e-3).epsilon(1e-9));

  // Ties on score fall back to loss, then tuple index.
  const std::vector<TupleEstimate> tied = {estimate_at(clear, 2e-4, 7), estimate_at(clear, 2e-4, 3),
                                           estimate_at(clear, 1e-4, 9)};
  const auto t = rank(tied, obs, cube, s);
  CHECK(t[0].tuple_index == 9);
  CHECK(t[1].tuple_index == 3);
  CHECK(t[2].tuple_index == 7);

  const std::vector<TupleEstimate> one = {estimate_at(sunk, 10.0, 4)};
  CHECK(rank(one, obs, cube, s)[0].tuple_index == 4);

  std::vector<TupleEstimate> none = {estimate_at(clear, 1.0, 0)};
  none[0].valid = false;
  CHECK_THROWS_WITH(rank(none, obs, cube, s), "every pose hypothesis diverged");
  none.push_back(estimate_at(clear, 1.0, 1));
  CHECK(rank(none, obs, cube, s).size() == 1);
}

TEST_CASE("rank invariants and parallel agreement") {
  const SensorModel s;
  const MeshQuery cube(primitives::cube(0.06));
  const auto samples = sample_surface(cube.mesh(), 3, 8);
  std::vector<SensorObservation> obs;
  for (const auto& x : samples) obs.push_back({place_sensor_at_sample(x, s.max_indent, s), {}});
  Philox r(12);
  std::vector<TupleEstimate> est;
  for (std::size_t j = 0; j < 60; ++j) {
    const Pose p = exp_map(Twist(Vec3(r.uniform(-0.01, 0.01), r.uniform(-0.01, 0.01), r.uniform(-0.01, 0.01)),
                                 Vec3(r.normal(), r.normal(), r.normal()) * 0.05));
    est.push_back(estimate_at(p, r.uniform(0.0, 1e-3), j));
  }
  const auto base = rank_serial(est, obs, cube, s);
  for (const auto& x : base) {
    CHECK(x.score >= x.final_loss);
    CHECK((x.score == x.final_loss) == (x.max_penetration == 0.0));
  }
  const int saved = omp_get_max_threads();
  for (int threads : {1, 4}) {
    omp_set_num_threads(threads);
    const auto par = rank(est, obs, cube, s);
    REQUIRE(par.size() == base.size());
    for (std::size_t i = 0; i < par.size(); ++i) {
      CHECK(par[i].tuple_index == base[i].tuple_index);
      CHECK(par[i].score == base[i].score);
    }
  }
  omp_set_num_threads(saved);

  // A constant added to every loss keeps the order.
  auto shifted = est;
  for (auto& e : shifted) e.loss += 0.25;
  const auto sh = rank(shifted, obs, cube, s);
  for (std::size_t i = 0; i < sh.size(); ++i) CHECK(sh[i].tuple_index == base[i].tuple_index);

  // Lowering one pose's penetration never moves it down.
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (base[i].max_penetration == 0.0) continue;
    auto scores = base;
    scores[i].max_penetration *= 0.5;
    scores[i].score = scores[i].final_loss + scores[i].max_penetration;
    const auto moved = scores[i].tuple_index;
    sort_ranked(scores);
    std::size_t pos = 0;
    while (scores[pos].tuple_index != moved) ++pos;
    CHECK(pos <= i);
  }
}
