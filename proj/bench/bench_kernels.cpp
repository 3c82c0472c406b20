// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include "tacpose/latent_db.hpp"
#include "tacpose/optimizer.hpp"
#include "tacpose/ranking.hpp"
#include "tacpose/render.hpp"
#include "tacpose/scene.hpp"
#include "tacpose/tuple_filter.hpp"

using namespace tacpose;

namespace {

struct Fixture {
  SensorModel sensor;
  MeshQuery mesh{primitives::by_name("lbracket")};
  LatentDatabase db;
  Scene scene;
  std::vector<Pose> placements;
  std::vector<CandidateTuple> tuples;
  std::vector<Vec3> sensor_positions;
  std::vector<TupleEstimate> estimates;

  Fixture() {
    const AnalyticEncoder enc;
    db = build_database(mesh, 150, sensor, enc, 7);
    scene = make_scene(mesh, "lbracket", default_contacts("lbracket", 0), 3, sensor);
    for (const auto& s : sample_surface(mesh.mesh(), 32, 5)) {
      placements.push_back(place_sensor_at_sample(s, sensor.max_indent, sensor));
    }
    for (const auto& o : scene.sensors) sensor_positions.push_back(o.position());
    std::vector<std::uint32_t> all(db.size());
    for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
    FilterConfig fc;
    fc.n_max = 256;
    tuples = filter_by_distance(TupleStream(std::vector<std::vector<std::uint32_t>>{all, all, all}), db, scene.sensors, fc).tuples;
    GdConfig gd;
    gd.k_max = 100;
    estimates = optimize(tuples, sensor_positions, gd, 1);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

std::vector<std::uint32_t> all_indices() {
  std::vector<std::uint32_t> all(fixture().db.size());
  for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
  return all;
}

void BM_Render(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(render_patches(f.mesh, f.placements, f.sensor));
}
void BM_RenderSerial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(render_patches_serial(f.mesh, f.placements, f.sensor));
}

void BM_Filter(benchmark::State& state) {
  const auto& f = fixture();
  const auto all = all_indices();
  for (auto _ : state) {
    benchmark::DoNotOptimize(filter_by_distance(TupleStream(std::vector<std::vector<std::uint32_t>>{all, all, all}), f.db, f.scene.sensors));
  }
}
void BM_FilterSerial(benchmark::State& state) {
  const auto& f = fixture();
  const auto all = all_indices();
  for (auto _ : state) {
    benchmark::DoNotOptimize(filter_by_distance_serial(TupleStream(std::vector<std::vector<std::uint32_t>>{all, all, all}), f.db, f.scene.sensors));
  }
}

void BM_Optimize(benchmark::State& state) {
  const auto& f = fixture();
  const GdConfig gd;
  for (auto _ : state) benchmark::DoNotOptimize(optimize(f.tuples, f.sensor_positions, gd, 1));
}
void BM_OptimizeSerial(benchmark::State& state) {
  const auto& f = fixture();
  const GdConfig gd;
  for (auto _ : state) benchmark::DoNotOptimize(optimize_serial(f.tuples, f.sensor_positions, gd, 1));
}

void BM_Rank(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(rank(f.estimates, f.scene.sensors, f.mesh, f.sensor));
}
void BM_RankSerial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(rank_serial(f.estimates, f.scene.sensors, f.mesh, f.sensor));
}

}  // namespace

BENCHMARK(BM_Render)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RenderSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Filter)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_FilterSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Optimize)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_OptimizeSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Rank)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RankSerial)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
