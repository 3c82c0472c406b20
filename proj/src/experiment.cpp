#include "tacpose/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "tacpose/mesh_io.hpp"
#include "tacpose/metrics.hpp"
#include "tacpose/rng.hpp"

namespace tacpose {

ExperimentConfig experiment_from_json(const Json& j) {
  ExperimentConfig c;
  if (!j.is_object()) throw std::invalid_argument("experiment: expected an object");
  for (const auto& [key, _] : j.items()) {
    static const char* known[] = {"objects",  "scenes_per_object", "sensor_counts", "modes",   "db_size",
                                  "db_seed",  "scene_seed",        "model_points",  "encoder", "pipeline",
                                  "sensor",   "scene",             "record_timing"};
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) == std::end(known)) {
      throw std::invalid_argument("experiment: unknown key '" + key + "'");
    }
  }
  if (j.contains("objects")) c.objects = j.at("objects").get<std::vector<std::string>>();
  if (j.contains("scenes_per_object")) c.scenes_per_object = j.at("scenes_per_object").get<std::size_t>();
  if (j.contains("sensor_counts")) c.sensor_counts = j.at("sensor_counts").get<std::vector<std::size_t>>();
  if (j.contains("modes")) {
    c.modes.clear();
    for (const auto& m : j.at("modes")) c.modes.push_back(mode_from_string(m.get<std::string>()));
  }
  if (j.contains("db_size")) c.db_size = j.at("db_size").get<std::size_t>();
  if (j.contains("db_seed")) c.db_seed = j.at("db_seed").get<std::uint64_t>();
  if (j.contains("scene_seed")) c.scene_seed = j.at("scene_seed").get<std::uint64_t>();
  if (j.contains("model_points")) c.model_points = j.at("model_points").get<std::size_t>();
  if (j.contains("encoder")) c.encoder = j.at("encoder").get<std::string>();
  if (j.contains("pipeline")) c.pipeline = pipeline_from_json(j.at("pipeline"), c.pipeline);
  if (j.contains("sensor")) c.sensor = sensor_from_json(j.at("sensor"));
  if (j.contains("scene")) c.scene = scene_config_from_json(j.at("scene"), c.scene);
  if (j.contains("record_timing")) c.record_timing = j.at("record_timing").get<bool>();
  if (c.objects.empty() || c.sensor_counts.empty() || c.modes.empty()) {
    throw std::invalid_argument("experiment: objects, sensor_counts and modes must be non-empty");
  }
  for (auto l : c.sensor_counts) {
    if (l < 1) throw std::invalid_argument("experiment: sensor counts must be >= 1");
  }
  if (c.db_size == 0) throw std::invalid_argument("experiment: db_size must be positive");
  return c;
}

Json to_json(const ExperimentConfig& c) {
  Json modes = Json::array();
  for (auto m : c.modes) modes.push_back(to_string(m));
  return {{"objects", c.objects},
          {"scenes_per_object", c.scenes_per_object},
          {"sensor_counts", c.sensor_counts},
          {"modes", modes},
          {"db_size", c.db_size},
          {"db_seed", c.db_seed},
          {"scene_seed", c.scene_seed},
          {"model_points", c.model_points},
          {"encoder", c.encoder},
          {"pipeline", to_json(c.pipeline)},
          {"sensor", to_json(c.sensor)},
          {"record_timing", c.record_timing}};
}

namespace {

double sorted_sum(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

PoseMetrics mean_of(const std::vector<PoseMetrics>& m) {
  PoseMetrics out;
  if (m.empty()) return out;
  std::vector<double> a, b, c, d;
  for (const auto& x : m) {
    a.push_back(x.position_cm);
    b.push_back(x.adi_auc);
    c.push_back(x.adi_auc_rotation);
    d.push_back(x.contact);
  }
  const auto n = static_cast<double>(m.size());
  return {sorted_sum(a) / n, sorted_sum(b) / n, sorted_sum(c) / n, sorted_sum(d) / n};
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

Json metrics_json(const PoseMetrics& m) {
  return {{"position_cm", m.position_cm},
          {"adi_auc", m.adi_auc},
          {"adi_auc_rotation", m.adi_auc_rotation},
          {"contact_accuracy", m.contact}};
}

Json aggregate_json(const Aggregate& a) {
  return {{"scenes", a.scenes},
          {"failures", a.failures},
          {"best", metrics_json(a.best_mean)},
          {"best_median_position_cm", a.best_median_position_cm},
          {"top", metrics_json(a.top_mean)}};
}

}  // namespace

Aggregate aggregate(const std::vector<const SceneRecord*>& records) {
  Aggregate a;
  std::vector<PoseMetrics> best, top;
  std::vector<double> pos;
  for (const auto* r : records) {
    if (!r->ok) {
      ++a.failures;
      continue;
    }
    ++a.scenes;
    best.push_back(r->best);
    top.push_back(r->top);
    pos.push_back(r->best.position_cm);
  }
  a.best_mean = mean_of(best);
  a.top_mean = mean_of(top);
  a.best_median_position_cm = median(pos);
  return a;
}

std::vector<const SceneRecord*> ExperimentReport::select(Mode mode, std::size_t sensors,
                                                         const std::string& object) const {
  std::vector<const SceneRecord*> out;
  for (const auto& r : records) {
    if (r.mode == mode && r.sensors == sensors && (object.empty() || r.object == object)) out.push_back(&r);
  }
  return out;
}

std::size_t ExperimentReport::failures() const {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const auto& r) { return !r.ok; }));
}

Json ExperimentReport::to_json() const {
  Json scenes = Json::array();
  for (const auto& r : records) {
    Json s = {{"object", r.object}, {"scene", r.scene}, {"sensors", r.sensors}, {"mode", tacpose::to_string(r.mode)},
              {"ok", r.ok}};
    if (r.ok) {
      s["best"] = metrics_json(r.best);
      s["top"] = metrics_json(r.top);
      s["ranked"] = r.ranked;
      s["final_loss"] = r.final_loss;
      s["score"] = r.score;
      s["omega_sizes"] = r.omega_sizes;
      s["tuples_kept"] = r.tuples_kept;
    } else {
      s["error"] = r.error;
    }
    if (config.record_timing) s["seconds"] = r.seconds;
    scenes.push_back(s);
  }
  Json summary = Json::array();
  for (auto mode : config.modes) {
    for (auto l : config.sensor_counts) {
      Json per_object = Json::object();
      for (const auto& o : config.objects) per_object[o] = aggregate_json(aggregate(select(mode, l, o)));
      summary.push_back({{"mode", tacpose::to_string(mode)},
                         {"sensors", l},
                         {"overall", aggregate_json(aggregate(select(mode, l)))},
                         {"objects", per_object}});
    }
  }
  return {{"schema_version", kReportSchema},
          {"config", tacpose::to_json(config)},
          {"warnings", {{"failed_scenes", failures()}}},
          {"summary", summary},
          {"scenes", scenes}};
}

std::string ExperimentReport::markdown() const {
  std::ostringstream out;
  char buf[160];
  for (auto l : config.sensor_counts) {
    out << "### " << l << (l == 1 ? " sensor" : " sensors") << "\n\n";
    out << "| object | mode | pos #1 (cm) | pos #1-5 (cm) | ADI-AUC #1 | ADI-AUC rot #1 | contact #1 (%) | scenes | "
           "failed |\n";
    out << "|---|---|---|---|---|---|---|---|---|\n";
    auto row = [&](const std::string& name, Mode mode, const Aggregate& a) {
      std::snprintf(buf, sizeof buf, "| %s | %s | %.2f | %.2f | %.1f | %.1f | %.1f | %zu | %zu |\n", name.c_str(),
                    tacpose::to_string(mode).c_str(), a.best_mean.position_cm, a.top_mean.position_cm,
                    a.best_mean.adi_auc, a.best_mean.adi_auc_rotation, a.best_mean.contact, a.scenes, a.failures);
      out << buf;
    };
    for (const auto& o : config.objects) {
      for (auto mode : config.modes) row(o, mode, aggregate(select(mode, l, o)));
    }
    for (auto mode : config.modes) row("mean", mode, aggregate(select(mode, l)));
    out << "\n";
  }
  return out.str();
}

namespace {

constexpr std::uint64_t kSceneTag = 0x7363656e;

PoseMetrics evaluate(const Pose& estimate, const Scene& scene, const MeshQuery& mesh, std::span<const Vec3> points,
                     const ExperimentConfig& cfg) {
  const Pose& gt = *scene.ground_truth;
  PoseMetrics m;
  m.position_cm = positional_error_cm(estimate, gt);
  m.adi_auc = adi_auc(estimate, gt, points, false);
  m.adi_auc_rotation = adi_auc(estimate, gt, points, true);
  m.contact = contact_accuracy(mesh, scene, estimate, cfg.sensor, cfg.scene.patch) ? 100.0 : 0.0;
  return m;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress) {
  ExperimentReport report;
  report.config = cfg;
  const auto encoder = make_encoder(cfg.encoder);
  const std::size_t max_l = *std::max_element(cfg.sensor_counts.begin(), cfg.sensor_counts.end());

  for (std::size_t oi = 0; oi < cfg.objects.size(); ++oi) {
    const auto& name = cfg.objects[oi];
    auto fail_all = [&](std::size_t scene, const std::string& why) {
      for (auto l : cfg.sensor_counts) {
        for (auto mode : cfg.modes) {
          SceneRecord r;
          r.object = name;
          r.scene = scene;
          r.sensors = l;
          r.mode = mode;
          r.error = why;
          if (progress) progress(r);
          report.records.push_back(std::move(r));
        }
      }
    };
    std::unique_ptr<MeshQuery> mesh;
    LatentDatabase db;
    std::vector<Vec3> points;
    try {
      mesh = std::make_unique<MeshQuery>(resolve_mesh(name));
      db = build_database(*mesh, cfg.db_size, cfg.sensor, *encoder, cfg.db_seed);
      points = model_points(mesh->mesh(), cfg.model_points);
    } catch (const std::exception& e) {
      for (std::size_t s = 0; s < cfg.scenes_per_object; ++s) fail_all(s, e.what());
      continue;
    }

    for (std::size_t si = 0; si < cfg.scenes_per_object; ++si) {
      Scene full;
      try {
        full = make_scene(*mesh, name, default_contacts(name, si, max_l), derive_seed(cfg.scene_seed, kSceneTag + oi, si),
                          cfg.sensor, cfg.scene);
      } catch (const std::exception& e) {
        fail_all(si, e.what());
        continue;
      }
      for (auto l : cfg.sensor_counts) {
        const Scene scene = full.prefix(l);
        for (auto mode : cfg.modes) {
          SceneRecord r;
          r.object = name;
          r.scene = si;
          r.sensors = l;
          r.mode = mode;
          const auto t0 = std::chrono::steady_clock::now();
          try {
            PipelineConfig pc = cfg.pipeline;
            pc.selection.mode = mode;
            pc.seed = derive_seed(cfg.pipeline.seed, oi, si);
            const auto est = estimate_pose(*mesh, db, *encoder, scene.sensors, cfg.sensor, pc);
            r.best = evaluate(est.best().pose, scene, *mesh, points, cfg);
            std::vector<PoseMetrics> tops;
            for (const auto& p : est.top) tops.push_back(evaluate(p.pose, scene, *mesh, points, cfg));
            r.top = mean_of(tops);
            r.ranked = est.top.size();
            r.final_loss = est.best().final_loss;
            r.score = est.best().score;
            r.omega_sizes = est.omega_sizes;
            r.tuples_kept = est.tuples_kept;
            r.ok = true;
          } catch (const std::exception& e) {
            r.error = e.what();
          }
          r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
          if (progress) progress(r);
          report.records.push_back(std::move(r));
        }
      }
    }
  }
  return report;
}

}  // namespace tacpose
