// tacpose command-line driver.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tacpose/config.hpp"
#include "tacpose/experiment.hpp"
#include "tacpose/mesh_io.hpp"
#include "tacpose/metrics.hpp"
#include "tacpose/patch_io.hpp"
#include "tacpose/superquadric.hpp"

namespace fs = std::filesystem;
using namespace tacpose;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, sep);) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string patch_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "patch_%06zu.tpat", i);
  return buf;
}

SensorModel load_sensor(const std::string& path) {
  return path.empty() ? SensorModel{} : sensor_from_json(read_json(path));
}

int gen_patches(const std::string& mesh_spec, bool superquadrics, std::size_t n, std::uint64_t seed,
                const std::string& sensor_path, const fs::path& out) {
  const auto sensor = load_sensor(sensor_path);
  fs::create_directories(out);
  Json index = Json::array();
  if (superquadrics) {
    const auto set = generate_training_set(n, seed, sensor);
    for (std::size_t i = 0; i < set.size(); ++i) {
      write_tpat(out / patch_name(i), set[i].patch);
      const auto& s = set[i];
      index.push_back({{"patch", patch_name(i)},
                       {"semi_axes", {s.shape.a, s.shape.b, s.shape.c}},
                       {"eps", {s.shape.eps1, s.shape.eps2}},
                       {"indent", s.indent},
                       {"no_contact", s.no_contact}});
    }
  } else {
    if (mesh_spec.empty()) throw CLI::ValidationError("gen-patches", "need --mesh or --superquadrics");
    const MeshQuery mesh(resolve_mesh(mesh_spec));
    const auto samples = sample_surface(mesh.mesh(), n, seed);
    std::vector<Pose> placements;
    for (const auto& s : samples) placements.push_back(place_sensor_at_sample(s, sensor.max_indent, sensor));
    const auto patches = render_patches(mesh, placements, sensor);
    for (std::size_t i = 0; i < patches.size(); ++i) {
      write_tpat(out / patch_name(i), patches[i]);
      const auto& s = samples[i];
      index.push_back({{"patch", patch_name(i)},
                       {"sample_id", s.sample_id},
                       {"position", {s.position.x(), s.position.y(), s.position.z()}},
                       {"normal", {s.normal.x(), s.normal.y(), s.normal.z()}}});
    }
  }
  write_json(out / "index.json", {{"sensor", to_json(sensor)}, {"patches", index}});
  std::cout << "wrote " << index.size() << " patches to " << out.string() << "\n";
  return 0;
}

int build_db(const std::string& mesh_spec, std::size_t m, std::uint64_t seed, const std::string& encoder_spec,
             const std::string& sensor_path, const fs::path& out) {
  const MeshQuery mesh(resolve_mesh(mesh_spec));
  const auto encoder = make_encoder(encoder_spec);
  const auto db = build_database(mesh, m, load_sensor(sensor_path), *encoder, seed);
  db.save(out);
  std::cout << "wrote " << db.size() << " entries (" << db.encoder_id << ") to " << out.string() << "\n";
  return 0;
}

int make_scene_cmd(const std::string& mesh_spec, const std::string& contacts, std::size_t index,
                   std::uint64_t seed, const std::string& sensor_path, const fs::path& out) {
  const auto sensor = load_sensor(sensor_path);
  const MeshQuery mesh(resolve_mesh(mesh_spec));
  std::vector<ContactClass> classes;
  if (contacts.empty()) {
    classes = default_contacts(mesh_spec, index);
  } else {
    for (const auto& c : split(contacts, ',')) classes.push_back(contact_class_from_string(c));
  }
  const auto scene = make_scene(mesh, mesh_spec, classes, seed, sensor);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_scene(out, scene, sensor);
  std::cout << "wrote " << scene.size() << "-sensor scene to " << out.string() << "\n";
  return 0;
}

int estimate_cmd(const fs::path& scene_path, const std::string& db_path, const std::string& mode,
                 const std::string& mesh_override, const std::string& encoder_spec, const std::string& config_path,
                 const fs::path& out, const std::string& ply_prefix) {
  const auto doc = read_json(scene_path);
  const auto scene = read_scene(scene_path);
  const SensorModel sensor = doc.contains("sensor") ? sensor_from_json(doc.at("sensor")) : SensorModel{};
  PipelineConfig cfg;
  if (doc.contains("pipeline")) cfg = pipeline_from_json(doc.at("pipeline"), cfg);
  if (!config_path.empty()) cfg = pipeline_from_json(read_json(config_path), cfg);
  std::string db_file = db_path;
  if (db_file.empty() && doc.contains("db")) {
    fs::path p = doc.at("db").get<std::string>();
    db_file = (p.is_relative() ? scene_path.parent_path() / p : p).string();
  }
  if (db_file.empty()) throw CLI::ValidationError("estimate", "need --db or a \"db\" entry in the scene");
  if (!mode.empty()) {
    cfg.selection.mode = mode_from_string(mode);
  } else if (doc.contains("mode")) {
    cfg.selection.mode = mode_from_string(doc.at("mode").get<std::string>());
  }
  std::string enc = encoder_spec;
  if (enc.empty()) enc = doc.contains("encoder") ? doc.at("encoder").get<std::string>() : "analytic";

  const MeshQuery mesh(resolve_mesh(mesh_override.empty() ? scene.object : mesh_override));
  const auto db = LatentDatabase::load(db_file);
  const auto encoder = make_encoder(enc);
  db.check_encoder(*encoder);
  const auto est = estimate_pose(mesh, db, *encoder, scene.sensors, sensor, cfg);

  Json ranked = Json::array();
  for (const auto& r : est.top) {
    Json p = pose_to_json(r.pose);
    p["final_loss"] = r.final_loss;
    p["max_penetration"] = r.max_penetration;
    p["score"] = r.score;
    p["tuple_index"] = r.tuple_index;
    ranked.push_back(p);
  }
  Json result = {{"schema_version", "tacpose-estimate/1"},
                 {"object", scene.object},
                 {"mode", to_string(cfg.selection.mode)},
                 {"pipeline", to_json(cfg)},
                 {"omega_sizes", est.omega_sizes},
                 {"delta_h", est.delta_h},
                 {"tuple_product", est.tuple_product},
                 {"tuples_kept", est.tuples_kept},
                 {"delta_d", est.delta_d},
                 {"shrink_rounds", est.shrink_rounds},
                 {"diverged_tuples", est.diverged_tuples},
                 {"ranked", ranked}};
  if (scene.ground_truth) {
    const auto points = model_points(mesh.mesh());
    const auto& best = est.best().pose;
    Json m = {{"position_cm", positional_error_cm(best, *scene.ground_truth)},
              {"adi_auc", adi_auc(best, *scene.ground_truth, points)},
              {"adi_auc_rotation", adi_auc(best, *scene.ground_truth, points, true)}};
    if (scene.labels.size() == scene.size()) m["contact_accuracy"] = contact_accuracy(mesh, scene, best, sensor);
    result["ground_truth_metrics"] = m;
  }
  write_json(out, result);
  if (!ply_prefix.empty()) {
    const auto& verts = mesh.mesh().vertices();
    for (std::size_t i = 0; i < est.top.size(); ++i) {
      std::vector<Vec3> pts;
      for (const auto& v : verts) pts.push_back(est.top[i].pose.apply(v));
      write_ply_points(ply_prefix + "." + std::to_string(i) + ".ply", pts);
    }
  }
  std::cout << "best pose: loss " << est.best().final_loss << ", penetration " << est.best().max_penetration << "\n";
  return 0;
}

int eval_cmd(const fs::path& exp_path, const std::vector<std::size_t>& sensors, bool timing, const fs::path& out,
             const std::string& table, bool quiet) {
  auto cfg = experiment_from_json(read_json(exp_path));
  if (!sensors.empty()) cfg.sensor_counts = sensors;
  if (timing) cfg.record_timing = true;
  std::size_t done = 0;
  const auto report = run_experiment(cfg, [&](const SceneRecord& r) {
    ++done;
    if (quiet) return;
    std::cerr << "[" << done << "] " << r.object << " #" << r.scene << " L=" << r.sensors << " "
              << to_string(r.mode) << ": ";
    if (r.ok) {
      std::cerr << r.best.position_cm << " cm\n";
    } else {
      std::cerr << "failed (" << r.error << ")\n";
    }
  });
  write_json(out, report.to_json());
  const auto md = report.markdown();
  if (!table.empty()) {
    std::ofstream(table) << md;
  }
  std::cout << md;
  if (report.failures() > 0) std::cerr << "warning: " << report.failures() << " scene runs failed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tactile multi-sensor 6D pose estimation"};
  app.require_subcommand(1);

  std::string mesh, sensor_path, encoder = "analytic", out, contacts, scene, db, mode, config, ply, experiment, table,
                                  sensors_list;
  std::size_t m = 2000, n = 1000, index = 0;
  std::uint64_t seed = 7;
  bool superquadrics = false, timing = false, quiet = false;

  auto* gen = app.add_subcommand("gen-patches", "Render tactile patches from a mesh or from random superquadrics");
  gen->add_option("--mesh", mesh, "Mesh file or primitive name");
  gen->add_flag("--superquadrics", superquadrics, "Object-agnostic superquadric training patches");
  gen->add_option("--n,--m", n, "Number of patches");
  gen->add_option("--seed", seed);
  gen->add_option("--sensor", sensor_path, "Sensor model JSON");
  gen->add_option("--out", out, "Output directory")->required();

  auto* bdb = app.add_subcommand("build-db", "Build a latent database for one object");
  bdb->add_option("--mesh", mesh, "Mesh file or primitive name")->required();
  bdb->add_option("--m", m, "Surface samples");
  bdb->add_option("--seed", seed);
  bdb->add_option("--encoder", encoder, "analytic or an ENCW file");
  bdb->add_option("--sensor", sensor_path, "Sensor model JSON");
  bdb->add_option("--out", out, "LDB1 output")->required();

  auto* msc = app.add_subcommand("make-scene", "Generate a synthetic scene with ground truth");
  msc->add_option("--mesh", mesh, "Mesh file or primitive name")->required();
  msc->add_option("--contacts", contacts, "Comma-separated classes: flat,edge,corner,curved");
  msc->add_option("--index", index, "Scene index for the default contact rotation");
  msc->add_option("--seed", seed);
  msc->add_option("--sensor", sensor_path, "Sensor model JSON");
  msc->add_option("--out", out, "Scene JSON output")->required();

  auto* est = app.add_subcommand("estimate", "Estimate the object pose for one scene");
  est->add_option("--scene", scene, "Scene JSON")->required()->check(CLI::ExistingFile);
  est->add_option("--db", db, "LDB1 database");
  est->add_option("--mode", mode, "ours or baseline");
  est->add_option("--mesh", mesh, "Override the scene's object mesh");
  est->add_option("--encoder", encoder, "analytic or an ENCW file");
  est->add_option("--config", config, "Pipeline config JSON");
  est->add_option("--ply", ply, "Write transformed model points per ranked pose with this prefix");
  est->add_option("--out", out, "Result JSON")->required();

  auto* ev = app.add_subcommand("eval", "Run an experiment and write a report");
  ev->add_option("--experiment", experiment, "Experiment JSON")->required()->check(CLI::ExistingFile);
  ev->add_option("--table", table, "Markdown table output");
  ev->add_flag("--timing", timing, "Record wall-clock seconds (report is no longer reproducible)");
  ev->add_flag("--quiet", quiet);
  ev->add_option("--out", out, "Report JSON")->required();

  auto* sw = app.add_subcommand("sweep", "Run an experiment over several sensor counts");
  sw->add_option("--sensors", sensors_list, "Comma-separated sensor counts")->required();
  sw->add_option("--experiment", experiment, "Experiment JSON")->required()->check(CLI::ExistingFile);
  sw->add_option("--table", table, "Markdown table output");
  sw->add_flag("--timing", timing, "Record wall-clock seconds");
  sw->add_flag("--quiet", quiet);
  sw->add_option("--out", out, "Report JSON")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) return gen_patches(mesh, superquadrics, n, seed, sensor_path, out);
    if (*bdb) return build_db(mesh, m, seed, encoder, sensor_path, out);
    if (*msc) return make_scene_cmd(mesh, contacts, index, seed, sensor_path, out);
    if (*est) {
      const std::string enc = est->count("--encoder") ? encoder : "";
      return estimate_cmd(scene, db, mode, mesh, enc, config, out, ply);
    }
    if (*ev) return eval_cmd(experiment, {}, timing, out, table, quiet);
    if (*sw) {
      std::vector<std::size_t> counts;
      for (const auto& s : split(sensors_list, ',')) counts.push_back(std::stoul(s));
      return eval_cmd(experiment, counts, timing, out, table, quiet);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
