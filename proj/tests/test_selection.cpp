#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <omp.h>

#include "tacpose/rng.hpp"
#include "tacpose/tuple_filter.hpp"

using namespace tacpose;

namespace {

LatentDatabase point_db(const std::vector<Vec3>& points) {
  LatentDatabase db;
  db.encoder_id = "points";
  db.dim = 1;
  db.h_nc = {1.0f};
  for (std::size_t i = 0; i < points.size(); ++i) {
    db.entries.push_back({static_cast<std::uint32_t>(i), points[i], Vec3::UnitZ(), {{1.0f}, 1.0}});
  }
  return db;
}

std::vector<SensorObservation> observe(const std::vector<Vec3>& positions) {
  std::vector<SensorObservation> obs;
  for (const auto& p : positions) obs.push_back({Pose{Mat3::Identity(), p}, TactilePatch(8, 8)});
  return obs;
}

std::vector<std::uint32_t> iota(std::size_t n) {
  std::vector<std::uint32_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<std::uint32_t>(i);
  return v;
}

// Distance from a cube surface point to the nearest cube edge.
double distance_to_cube_edge(const Vec3& p, double half) {
  int face_axis = 0;
  for (int a = 1; a < 3; ++a) {
    if (std::abs(p[a]) > std::abs(p[face_axis])) face_axis = a;
  }
  double d = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (a != face_axis) d = std::min(d, half - std::abs(p[a]));
  }
  return d;
}

Pose pose_of(const Vec3& axis_angle, const Vec3& t) { return exp_map(Twist(t, axis_angle)); }

}  // namespace

TEST_CASE("build_database: single entry on the mesh, deterministic") {
  const AnalyticEncoder enc;
  const SensorModel s;
  const MeshQuery cube(primitives::cube(0.06));
  const auto db = build_database(cube, 1, s, enc, 3);
  REQUIRE(db.size() == 1);
  CHECK(std::abs(cube.signed_distance(db.entries[0].position)) < 1e-12);
  CHECK(db.encoder_id == enc.id());

  const MeshQuery box(primitives::by_name("box"));
  const auto a = build_database(box, 64, s, enc, 11), b = build_database(box, 64, s, enc, 11);
  CHECK(a.size() == 64);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.entries[i].position == b.entries[i].position);
    CHECK(a.entries[i].feature.vector == b.entries[i].feature.vector);
  }
}

TEST_CASE("select_compatible: baseline and vacuous threshold") {
  const AnalyticEncoder enc;
  const SensorModel s;
  const MeshQuery mesh(primitives::by_name("cylinder"));
  const auto db = build_database(mesh, 80, s, enc, 2);
  const SurfaceSample at{db.entries[5].position, db.entries[5].normal, 0, 0};
  const SensorObservation obs{place_sensor_at_sample(at, s.max_indent, s),
                              render_patch(mesh, place_sensor_at_sample(at, s.max_indent, s), s)};
  SelectionConfig cfg;
  cfg.mode = Mode::baseline;
  CHECK(select_compatible(db, obs, enc, cfg).omega.size() == db.size());
  cfg.mode = Mode::ours;
  cfg.delta_h = std::numeric_limits<double>::infinity();
  const auto all = select_compatible(db, obs, enc, cfg);
  CHECK(all.omega == iota(db.size()));
  cfg.delta_h = 0.0;
  CHECK_THROWS(select_compatible(db, obs, enc, cfg));

  // Quantile rule keeps at least ceil(q M) entries and delta_h stays positive.
  const auto q = select_compatible(db, obs, enc, {});
  CHECK(q.omega.size() >= 8);
  CHECK(q.delta_h > 0.0);
  CHECK(std::is_sorted(q.omega.begin(), q.omega.end()));
}

TEST_CASE("no compatible contacts") {
  const AnalyticEncoder enc;
  const SensorModel s;
  const MeshQuery cube(primitives::cube(0.06));
  auto db = build_database(cube, 10, s, enc, 2);
  SensorObservation obs{Pose::identity(), TactilePatch(s.pixels_u, s.pixels_v)};
  SelectionConfig cfg;
  cfg.delta_h = 1e-9;
  for (auto& e : db.entries) e.feature.contact_score = 0.0;  // far from the empty patch's 1.0
  CHECK_THROWS_WITH(select_compatible(db, obs, enc, cfg), "no compatible contacts \xE2\x80\x94 increase delta_h");
}

TEST_CASE("omega grows with delta_h") {
  const AnalyticEncoder enc;
  const SensorModel s;
  const MeshQuery mesh(primitives::by_name("lbracket"));
  const auto db = build_database(mesh, 150, s, enc, 4);
  const auto samples = sample_surface(mesh.mesh(), 5, 77);
  for (const auto& x : samples) {
    const Pose p = place_sensor_at_sample(x, 0.8 * s.max_indent, s);
    const SensorObservation obs{p, render_patch(mesh, p, s)};
    std::set<std::uint32_t> prev;
    for (double dh : {1e-4, 1e-3, 0.01, 0.03, 0.1, 0.3, 1.0, 2.0}) {
      SelectionConfig cfg;
      cfg.delta_h = dh;
      std::set<std::uint32_t> cur;
      try {
        const auto o = select_compatible(db, obs, enc, cfg).omega;
        cur.insert(o.begin(), o.end());
      } catch (const std::runtime_error&) {
      }
      CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
      prev = cur;
    }
  }
}

TEST_CASE("selection recall over three meshes") {
  const AnalyticEncoder enc;
  const SensorModel s;
  int hits = 0, total = 0;
  std::uint64_t seed = 40;
  for (const char* name : {"cube", "cylinder", "lbracket", "box"}) {
    const MeshQuery mesh(primitives::by_name(name));
    const auto db = build_database(mesh, 300, s, enc, ++seed);
    Philox r(++seed);
    for (int i = 0; i < 30; ++i) {
      const auto k = static_cast<std::uint32_t>(r.below(db.size()));
      const SurfaceSample at{db.entries[k].position, db.entries[k].normal, 0, 0};
      const Pose p = place_sensor_at_sample(at, s.max_indent, s);
      const auto o = select_compatible(db, {p, render_patch(mesh, p, s)}, enc, {}).omega;
      hits += std::binary_search(o.begin(), o.end(), k) ? 1 : 0;
      ++total;
    }
  }
  CHECK(total >= 100);
  CHECK(hits >= 0.95 * total);
}

TEST_CASE("cube: flat query selects face samples") {
  const AnalyticEncoder enc;
  const SensorModel s;
  const double half = 0.03;
  const MeshQuery cube(primitives::cube(2 * half));
  const auto db = build_database(cube, 1000, s, enc, 12);
  // Face: all four gel corners lie on the sample's face. Edge: within two pixels of an edge.
  auto on_face = [&](const DatabaseEntry& e) {
    const Pose g = place_sensor(e.position, e.normal, s.max_indent, s);
    for (double sx : {-0.5, 0.5}) {
      for (double sy : {-0.5, 0.5}) {
        const Vec3 c = g.apply(Vec3(sx * s.gel_width, sy * s.gel_height, 0.0));
        if ((c.cwiseAbs().array() > half + 1e-12).any()) return false;
      }
    }
    return true;
  };
  const Pose p = place_sensor(Vec3(0, 0, half), Vec3::UnitZ(), s.max_indent, s);
  const auto o = select_compatible(db, {p, render_patch(cube, p, s)}, enc, {}).omega;
  int face = 0, edge = 0;
  for (auto k : o) {
    const double d = distance_to_cube_edge(db.entries[k].position, half);
    face += on_face(db.entries[k]) ? 1 : 0;
    edge += d < s.pitch_u() * 2 ? 1 : 0;
  }
  MESSAGE("omega ", o.size(), " face ", face, " edge ", edge);
  CHECK(face >= 0.8 * static_cast<double>(o.size()));
  CHECK(face >= 5 * edge);
}

TEST_CASE("tuple stream") {
  TupleStream t({{0, 1, 2}, {3, 4, 5, 6}, {7, 8, 9, 10, 11}});
  CHECK(t.size() == 60);
  std::vector<std::uint32_t> tup, first;
  std::set<std::vector<std::uint32_t>> seen;
  REQUIRE(t.next(first));
  CHECK(first == std::vector<std::uint32_t>{0, 3, 7});
  REQUIRE(t.next(tup));
  CHECK(tup == std::vector<std::uint32_t>{0, 3, 8});
  t.reset();
  int n = 0;
  while (t.next(tup)) {
    seen.insert(tup);
    ++n;
  }
  CHECK(n == 60);
  CHECK(seen.size() == 60);
  CHECK(tup == std::vector<std::uint32_t>{2, 6, 11});

  TupleStream single({{4, 9, 2}});
  std::vector<std::uint32_t> order;
  while (single.next(tup)) order.push_back(tup[0]);
  CHECK(order == std::vector<std::uint32_t>{4, 9, 2});

  CHECK_THROWS(TupleStream({}));
  CHECK_THROWS(TupleStream({{1}, {}}));
  std::vector<std::vector<std::uint32_t>> huge(5, iota(100000));
  CHECK(TupleStream(huge).size() == std::numeric_limits<std::uint64_t>::max());
}

TEST_CASE("pairwise cost examples") {
  const std::vector<Vec3> s = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  const Pose g = pose_of(Vec3(0.3, -1.1, 0.4), Vec3(5, -2, 1));
  std::vector<Vec3> t;
  for (const auto& x : s) t.push_back(g.apply(x));
  CHECK(pairwise_cost(s, t) < 1e-14);

  // Each pair 0.03 longer: scale the triangle about its vertex 0 is not uniform, so
  // build it directly with side lengths (1.03, 1.03, sqrt(2) + 0.03).
  const double a = 1.03, c = std::sqrt(2.0) + 0.03;
  const double x = (a * a + a * a - c * c) / (2 * a);
  const std::vector<Vec3> off = {Vec3(0, 0, 0), Vec3(a, 0, 0), Vec3(x, std::sqrt(a * a - x * x), 0)};
  CHECK(pairwise_cost(s, off) == doctest::Approx(0.03).epsilon(1e-9));

  const auto db = point_db(off);
  FilterConfig cfg;
  cfg.delta_d0 = 0.02;
  CHECK_THROWS_WITH(filter_by_distance(TupleStream({{0}, {1}, {2}}), db, observe(s), cfg),
                    "no geometrically consistent tuples");
  cfg.delta_d0 = 0.031;
  CHECK(filter_by_distance(TupleStream({{0}, {1}, {2}}), db, observe(s), cfg).tuples.size() == 1);
  CHECK(pairwise_cost(std::vector<Vec3>{Vec3(1, 2, 3)}, std::vector<Vec3>{Vec3(-4, 0, 0)}) == 0.0);
}

TEST_CASE("pairwise cost is rigid-invariant on both sides") {
  Philox r(8);
  for (int i = 0; i < 100; ++i) {
    std::vector<Vec3> s(4), t(4);
    for (int k = 0; k < 4; ++k) {
      s[k] = Vec3(r.uniform(-0.1, 0.1), r.uniform(-0.1, 0.1), r.uniform(-0.1, 0.1));
      t[k] = Vec3(r.uniform(-0.1, 0.1), r.uniform(-0.1, 0.1), r.uniform(-0.1, 0.1));
    }
    const Pose a = pose_of(Vec3(r.normal(), r.normal(), r.normal()), Vec3(r.normal(), 0, 1));
    const Pose b = pose_of(Vec3(r.normal(), r.normal(), r.normal()), Vec3(0, r.normal(), -1));
    std::vector<Vec3> sa, tb;
    for (int k = 0; k < 4; ++k) {
      sa.push_back(a.apply(s[k]));
      tb.push_back(b.apply(t[k]));
    }
    CHECK(std::abs(pairwise_cost(s, t) - pairwise_cost(sa, tb)) < 1e-12);
  }
}

TEST_CASE("filter agrees with a brute-force scan and with the reference") {
  Philox r(19);
  for (int trial = 0; trial < 6; ++trial) {
    std::vector<Vec3> pts(50);
    for (auto& p : pts) p = Vec3(r.uniform(-0.05, 0.05), r.uniform(-0.05, 0.05), r.uniform(-0.05, 0.05));
    const auto db = point_db(pts);
    const std::vector<Vec3> sensors = {Vec3(0.3, 0.1, 0), Vec3(0.33, 0.12, 0.01), Vec3(0.31, 0.08, 0.04)};
    const auto obs = observe(sensors);
    FilterConfig cfg;
    cfg.n_max = trial % 2 == 0 ? 200 : 5000;
    cfg.delta_d0 = 0.02 + 0.01 * trial;
    std::vector<std::vector<std::uint32_t>> omegas = {iota(50), iota(50), iota(50)};
    if (trial == 5) omegas[1] = {3, 7, 11, 40};

    // Brute force: every tuple's cost from an independent formula.
    std::vector<std::pair<double, std::vector<std::uint32_t>>> all;
    for (auto i : omegas[0]) {
      for (auto j : omegas[1]) {
        for (auto k : omegas[2]) {
          const std::array<Vec3, 3> t = {pts[i], pts[j], pts[k]};
          double c = 0.0;
          for (int u = 0; u < 3; ++u) {
            for (int v = u + 1; v < 3; ++v) {
              c += std::abs((sensors[u] - sensors[v]).norm() - (t[u] - t[v]).norm());
            }
          }
          all.push_back({c / 3.0, {i, j, k}});
        }
      }
    }
    double dd = cfg.delta_d0;
    auto passing = [&] {
      std::size_t n = 0;
      for (const auto& e : all) n += e.first < dd ? 1 : 0;
      return n;
    };
    while (passing() > cfg.n_max) dd *= cfg.shrink;
    std::set<std::vector<std::uint32_t>> expected;
    for (const auto& e : all) {
      if (e.first < dd) expected.insert(e.second);
    }

    const auto fast = filter_by_distance(TupleStream(omegas), db, obs, cfg);
    const auto serial = filter_by_distance_serial(TupleStream(omegas), db, obs, cfg);
    const auto ref = filter_by_distance_reference(TupleStream(omegas), db, obs, cfg);
    CHECK(fast.delta_d == doctest::Approx(dd).epsilon(1e-12));
    CHECK(fast.tuples.size() <= cfg.n_max);
    REQUIRE(fast.tuples.size() == expected.size());
    std::set<std::vector<std::uint32_t>> got;
    for (const auto& t : fast.tuples) got.insert(t.refs);
    CHECK(got == expected);
    CHECK(fast.product_size == TupleStream(omegas).size());

    REQUIRE(serial.tuples.size() == fast.tuples.size());
    REQUIRE(ref.tuples.size() == fast.tuples.size());
    for (std::size_t i = 0; i < fast.tuples.size(); ++i) {
      CHECK(fast.tuples[i].refs == serial.tuples[i].refs);
      CHECK(fast.tuples[i].cost == serial.tuples[i].cost);
      CHECK(fast.tuples[i].refs == ref.tuples[i].refs);
      if (i > 0) CHECK(fast.tuples[i - 1].cost <= fast.tuples[i].cost);
      for (int k = 0; k < 3; ++k) CHECK(fast.tuples[i].positions[k] == pts[fast.tuples[i].refs[k]]);
    }
    CHECK(fast.rounds == ref.rounds);
  }
}

TEST_CASE("filter result does not depend on the thread count") {
  Philox r(5);
  std::vector<Vec3> pts(60);
  for (auto& p : pts) p = Vec3(r.uniform(-0.05, 0.05), r.uniform(-0.05, 0.05), r.uniform(-0.05, 0.05));
  const auto db = point_db(pts);
  const auto obs = observe({Vec3(0, 0, 0), Vec3(0.03, 0, 0), Vec3(0, 0.04, 0.01)});
  FilterConfig cfg;
  cfg.n_max = 300;
  std::vector<FilterResult> runs;
  const int saved = omp_get_max_threads();
  for (int threads : {1, 2, 3, 4}) {
    omp_set_num_threads(threads);
    runs.push_back(filter_by_distance(TupleStream({iota(60), iota(60), iota(60)}), db, obs, cfg));
  }
  omp_set_num_threads(saved);
  for (const auto& run : runs) {
    REQUIRE(run.tuples.size() == runs[0].tuples.size());
    for (std::size_t i = 0; i < run.tuples.size(); ++i) CHECK(run.tuples[i].refs == runs[0].tuples[i].refs);
  }
}

TEST_CASE("one sensor keeps the first n_max tuples in stream order") {
  const auto db = point_db({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(3, 0, 0)});
  FilterConfig cfg;
  cfg.n_max = 3;
  const auto res = filter_by_distance(TupleStream({{3, 1, 0, 2}}), db, observe({Vec3(9, 9, 9)}), cfg);
  REQUIRE(res.tuples.size() == 3);
  CHECK(res.tuples[0].refs[0] == 3);
  CHECK(res.tuples[1].refs[0] == 1);
  CHECK(res.tuples[2].refs[0] == 0);
  CHECK(res.tuples[0].cost == 0.0);
}

TEST_CASE("filter argument checks") {
  const auto db = point_db({Vec3(0, 0, 0), Vec3(1, 0, 0)});
  const auto obs = observe({Vec3(0, 0, 0), Vec3(1, 0, 0)});
  CHECK_THROWS(filter_by_distance(TupleStream(std::vector<std::vector<std::uint32_t>>{{0}}), db, obs));
  FilterConfig cfg;
  cfg.n_max = 0;
  CHECK_THROWS(filter_by_distance(TupleStream({{0}, {1}}), db, obs, cfg));
  cfg = {};
  cfg.shrink = 1.0;
  CHECK_THROWS(filter_by_distance(TupleStream({{0}, {1}}), db, obs, cfg));
}
