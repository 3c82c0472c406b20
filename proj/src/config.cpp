#include "tacpose/config.hpp"

#include <fstream>
#include <initializer_list>
#include <stdexcept>

#include "tacpose/conv_encoder.hpp"
#include "tacpose/patch_io.hpp"

namespace tacpose {

namespace {

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw std::invalid_argument(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read_if(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Vec3 vec3_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json vec3_to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

FeatureMetric metric_from_string(const std::string& s) {
  if (s == "projection") return FeatureMetric::projection;
  if (s == "cosine") return FeatureMetric::cosine;
  throw std::invalid_argument("unknown feature metric: " + s);
}

std::string to_string(FeatureMetric m) { return m == FeatureMetric::cosine ? "cosine" : "projection"; }

}  // namespace

SensorModel sensor_from_json(const Json& j) {
  check_keys(j, {"gel_width", "gel_height", "pixels_u", "pixels_v", "max_indent", "proxy_thickness"}, "sensor");
  SensorModel s;
  read_if(j, "gel_width", s.gel_width);
  read_if(j, "gel_height", s.gel_height);
  read_if(j, "pixels_u", s.pixels_u);
  read_if(j, "pixels_v", s.pixels_v);
  read_if(j, "max_indent", s.max_indent);
  read_if(j, "proxy_thickness", s.proxy_thickness);
  s.validate();
  return s;
}

Json to_json(const SensorModel& s) {
  return {{"gel_width", s.gel_width},   {"gel_height", s.gel_height}, {"pixels_u", s.pixels_u},
          {"pixels_v", s.pixels_v},     {"max_indent", s.max_indent}, {"proxy_thickness", s.proxy_thickness}};
}

GdConfig gd_from_json(const Json& j, GdConfig c) {
  check_keys(j, {"k_max", "l_s", "gains", "n_rot_seeds", "divergence_cap", "gradient_tol"}, "gd");
  read_if(j, "k_max", c.k_max);
  read_if(j, "l_s", c.l_s);
  if (j.contains("gains")) {
    const auto& g = j.at("gains");
    check_keys(g, {"translation", "rotation"}, "gd.gains");
    read_if(g, "translation", c.gain_translation);
    read_if(g, "rotation", c.gain_rotation);
  }
  read_if(j, "n_rot_seeds", c.n_rot_seeds);
  read_if(j, "divergence_cap", c.divergence_cap);
  read_if(j, "gradient_tol", c.gradient_tol);
  c.validate();
  return c;
}

Json to_json(const GdConfig& c) {
  return {{"k_max", c.k_max},
          {"l_s", c.l_s},
          {"gains", {{"translation", c.gain_translation}, {"rotation", c.gain_rotation}}},
          {"n_rot_seeds", c.n_rot_seeds},
          {"divergence_cap", c.divergence_cap},
          {"gradient_tol", c.gradient_tol}};
}

Mode mode_from_string(const std::string& s) {
  if (s == "ours") return Mode::ours;
  if (s == "baseline") return Mode::baseline;
  throw std::invalid_argument("unknown mode: " + s + " (expected ours or baseline)");
}

std::string to_string(Mode m) { return m == Mode::ours ? "ours" : "baseline"; }

PipelineConfig pipeline_from_json(const Json& j, PipelineConfig c) {
  check_keys(j, {"selection", "filter", "gd", "rank", "top_k", "seed"}, "pipeline");
  if (j.contains("selection")) {
    const auto& s = j.at("selection");
    check_keys(s, {"mode", "delta_h", "quantile", "metric"}, "selection");
    if (s.contains("mode")) c.selection.mode = mode_from_string(s.at("mode").get<std::string>());
    if (s.contains("delta_h")) {
      if (s.at("delta_h").is_null()) {
        c.selection.delta_h.reset();
      } else {
        c.selection.delta_h = s.at("delta_h").get<double>();
      }
    }
    read_if(s, "quantile", c.selection.quantile);
    if (s.contains("metric")) c.selection.metric = metric_from_string(s.at("metric").get<std::string>());
  }
  if (j.contains("filter")) {
    const auto& f = j.at("filter");
    check_keys(f, {"n_max", "delta_d0", "shrink"}, "filter");
    read_if(f, "n_max", c.filter.n_max);
    read_if(f, "delta_d0", c.filter.delta_d0);
    read_if(f, "shrink", c.filter.shrink);
  }
  if (j.contains("gd")) c.gd = gd_from_json(j.at("gd"), c.gd);
  if (j.contains("rank")) {
    const auto& r = j.at("rank");
    check_keys(r, {"penetration_weight", "grid"}, "rank");
    read_if(r, "penetration_weight", c.rank.penetration_weight);
    if (r.contains("grid")) {
      const auto& g = r.at("grid");
      if (!g.is_array() || g.size() != 3) throw std::invalid_argument("rank.grid: expected [nu, nv, nz]");
      c.rank.grid = {g[0].get<int>(), g[1].get<int>(), g[2].get<int>()};
    }
  }
  read_if(j, "top_k", c.top_k);
  read_if(j, "seed", c.seed);
  return c;
}

Json to_json(const PipelineConfig& c) {
  Json sel = {{"mode", to_string(c.selection.mode)}};
  sel["delta_h"] = c.selection.delta_h ? Json(*c.selection.delta_h) : Json(nullptr);
  sel["quantile"] = c.selection.quantile;
  sel["metric"] = to_string(c.selection.metric);
  return {{"selection", sel},
          {"filter", {{"n_max", c.filter.n_max}, {"delta_d0", c.filter.delta_d0}, {"shrink", c.filter.shrink}}},
          {"gd", to_json(c.gd)},
          {"rank",
           {{"penetration_weight", c.rank.penetration_weight},
            {"grid", Json::array({c.rank.grid.nu, c.rank.grid.nv, c.rank.grid.nz})}}},
          {"top_k", c.top_k},
          {"seed", c.seed}};
}

SceneConfig scene_config_from_json(const Json& j, SceneConfig c) {
  check_keys(j,
             {"pool_size", "max_tries", "min_separation", "indent_min", "indent_max", "translation_range", "geometry",
              "patch"},
             "scene");
  read_if(j, "pool_size", c.pool_size);
  read_if(j, "max_tries", c.max_tries);
  read_if(j, "min_separation", c.min_separation);
  read_if(j, "indent_min", c.indent_min);
  read_if(j, "indent_max", c.indent_max);
  read_if(j, "translation_range", c.translation_range);
  if (j.contains("geometry")) {
    const auto& g = j.at("geometry");
    check_keys(g, {"radius", "cluster_angle_deg", "flat_spread_deg"}, "scene.geometry");
    read_if(g, "radius", c.geometry.radius);
    read_if(g, "cluster_angle_deg", c.geometry.cluster_angle_deg);
    read_if(g, "flat_spread_deg", c.geometry.flat_spread_deg);
  }
  if (j.contains("patch")) {
    const auto& p = j.at("patch");
    check_keys(p, {"widen", "flat_min_contact", "plane_residual", "quadric_residual", "corner_max_contact"},
               "scene.patch");
    read_if(p, "widen", c.patch.widen);
    read_if(p, "flat_min_contact", c.patch.flat_min_contact);
    read_if(p, "plane_residual", c.patch.plane_residual);
    read_if(p, "quadric_residual", c.patch.quadric_residual);
    read_if(p, "corner_max_contact", c.patch.corner_max_contact);
  }
  if (!(c.indent_min > 0 && c.indent_min <= c.indent_max && c.indent_max <= 1.0)) {
    throw std::invalid_argument("scene: need 0 < indent_min <= indent_max <= 1");
  }
  return c;
}

Json pose_to_json(const Pose& p) {
  const auto q = p.quaternion();
  return {{"position", vec3_to_json(p.translation)}, {"quaternion", Json::array({q.w(), q.x(), q.y(), q.z()})}};
}

Pose pose_from_json(const Json& j) {
  const auto& q = j.at("quaternion");
  if (!q.is_array() || q.size() != 4) throw std::invalid_argument("quaternion: expected [w, x, y, z]");
  const Eigen::Quaterniond quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>());
  if (std::abs(quat.norm() - 1.0) > 1e-6) throw std::invalid_argument("quaternion must be unit length");
  return Pose::from_quaternion(quat.normalized(), vec3_from_json(j.at("position")));
}

std::unique_ptr<Encoder> make_encoder(const std::string& spec) {
  if (spec.empty() || spec == "analytic") return std::make_unique<AnalyticEncoder>();
  return std::make_unique<ConvEncoder>(EncoderWeights::load(spec));
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_scene(const std::filesystem::path& path, const Scene& scene, const SensorModel& sensor) {
  const auto dir = path.parent_path();
  const auto stem = path.stem().string();
  Json j;
  j["object"] = scene.object;
  if (scene.ground_truth) j["ground_truth"] = pose_to_json(*scene.ground_truth);
  j["sensor"] = to_json(sensor);
  Json sensors = Json::array();
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const auto name = stem + ".s" + std::to_string(i) + ".tpat";
    write_tpat(dir / name, scene.sensors[i].patch);
    Json s = pose_to_json(scene.sensors[i].pose);
    s["patch"] = name;
    if (i < scene.labels.size()) s["label"] = to_string(scene.labels[i]);
    sensors.push_back(s);
  }
  j["sensors"] = sensors;
  write_json(path, j);
}

Scene read_scene(const std::filesystem::path& path) {
  const auto j = read_json(path);
  check_keys(j, {"object", "ground_truth", "sensor", "sensors", "db", "mode", "pipeline", "encoder"}, "scene file");
  Scene scene;
  scene.object = j.at("object").get<std::string>();
  if (j.contains("ground_truth")) scene.ground_truth = pose_from_json(j.at("ground_truth"));
  const auto& sensors = j.at("sensors");
  if (!sensors.is_array() || sensors.empty()) throw std::invalid_argument("scene file: need at least one sensor");
  bool labelled = true;
  for (const auto& s : sensors) {
    check_keys(s, {"position", "quaternion", "patch", "label"}, "scene sensor");
    std::filesystem::path patch = s.at("patch").get<std::string>();
    if (patch.is_relative()) patch = path.parent_path() / patch;
    scene.sensors.push_back({pose_from_json(s), read_tpat(patch)});
    if (s.contains("label")) {
      scene.labels.push_back(contact_class_from_string(s.at("label").get<std::string>()));
    } else {
      labelled = false;
    }
  }
  if (!labelled) scene.labels.clear();
  return scene;
}

}  // namespace tacpose
