#include "dualbev/config.hpp"

#include <fstream>

#include "dualbev/btsr.hpp"
#include "dualbev/error.hpp"

namespace dualbev {
namespace {

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw Error(Errc::ConfigError, std::string("field '") + key + "': " + e.what());
  }
}

template <typename T>
T get_req(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw Error(Errc::ConfigError, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw Error(Errc::ConfigError, std::string("field '") + key + "': " + e.what());
  }
}

template <int R, int C>
Eigen::Matrix<double, R, C> matrix_from_json(const Json& j, const char* what) {
  Eigen::Matrix<double, R, C> m;
  if (!j.is_array() || j.size() != R) throw Error(Errc::ConfigError, std::string(what) + " has wrong row count");
  for (int r = 0; r < R; ++r) {
    if (!j[r].is_array() || j[r].size() != C)
      throw Error(Errc::ConfigError, std::string(what) + " has wrong column count");
    for (int c = 0; c < C; ++c) {
      if (!j[r][c].is_number()) throw Error(Errc::ConfigError, std::string(what) + " has a non-number");
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

template <typename Derived>
Json matrix_to_json(const Eigen::MatrixBase<Derived>& m) {
  Json rows = Json::array();
  for (int r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Eigen::Vector3d vec3_from_json(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw Error(Errc::ConfigError, std::string(what) + " must be [x,y,z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

Json rig_to_json(const CameraRig& rig) {
  return {{"cam_id", rig.cam_id}, {"feat_w", rig.feat_w}, {"feat_h", rig.feat_h},
          {"K", matrix_to_json(rig.K)}, {"T", matrix_to_json(rig.T)}};
}

CameraRig rig_from_json(const Json& j) {
  CameraRig rig;
  rig.cam_id = get_or(j, "cam_id", 0);
  rig.feat_w = get_req<int>(j, "feat_w");
  rig.feat_h = get_req<int>(j, "feat_h");
  rig.K = matrix_from_json<3, 3>(get_req<Json>(j, "K"), "K");
  rig.T = matrix_from_json<4, 4>(get_req<Json>(j, "T"), "T");
  try {
    rig.validate();
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, e.what());
  }
  return rig;
}

Json grid_to_json(const BevGridSpec& g) {
  return {{"x_min", g.x_min}, {"x_max", g.x_max}, {"y_min", g.y_min},
          {"y_max", g.y_max}, {"nx", g.nx},       {"ny", g.ny}};
}

BevGridSpec grid_from_json(const Json& j) {
  BevGridSpec g;
  g.x_min = get_or(j, "x_min", g.x_min);
  g.x_max = get_or(j, "x_max", g.x_max);
  g.y_min = get_or(j, "y_min", g.y_min);
  g.y_max = get_or(j, "y_max", g.y_max);
  g.nx = get_or(j, "nx", g.nx);
  g.ny = get_or(j, "ny", g.ny);
  try {
    g.validate();
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, e.what());
  }
  return g;
}

Json depth_to_json(const DepthBinSpec& d) {
  return {{"d_min", d.d_min}, {"d_max", d.d_max}, {"step", d.step}};
}

DepthBinSpec depth_from_json(const Json& j) {
  DepthBinSpec d;
  d.d_min = get_or(j, "d_min", d.d_min);
  d.d_max = get_or(j, "d_max", d.d_max);
  d.step = get_or(j, "step", d.step);
  try {
    d.validate();
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, e.what());
  }
  return d;
}

Json heights_to_json(const HeightMode& m) {
  if (m.kind == HeightMode::Kind::Uniform) return {{"mode", "uniform"}, {"n", m.count}};
  return {{"mode", "multires"}};
}

HeightMode heights_from_json(const Json& j) {
  const auto mode = get_or<std::string>(j, "mode", "multires");
  if (mode == "multires") return HeightMode::multi_res();
  if (mode == "uniform") {
    const int n = get_req<int>(j, "n");
    if (n < 2) throw Error(Errc::ConfigError, "uniform heights need n >= 2");
    return HeightMode::uniform(n);
  }
  throw Error(Errc::ConfigError, "unknown height mode '" + mode + "'");
}

SceneDocument scene_document_from_json(const Json& j) {
  if (!j.is_object()) throw Error(Errc::ConfigError, "scene spec must be a JSON object");
  SceneDocument doc;
  SceneSpec& s = doc.spec;
  s.seed = get_or<std::uint64_t>(j, "seed", 0);
  s.n_cameras = get_or(j, "n_cameras", s.n_cameras);
  s.feat_w = get_or(j, "feat_w", s.feat_w);
  s.feat_h = get_or(j, "feat_h", s.feat_h);
  s.channels = get_or(j, "channels", s.channels);
  s.kappa = get_or(j, "kappa", s.kappa);
  s.noise_sigma = get_or(j, "noise_sigma", s.noise_sigma);
  if (j.contains("camera")) {
    const Json& c = j["camera"];
    s.camera.fx = get_or(c, "fx", s.camera.fx);
    s.camera.fy = get_or(c, "fy", s.camera.fy);
    s.camera.cx = get_or(c, "cx", s.camera.cx);
    s.camera.cy = get_or(c, "cy", s.camera.cy);
    s.camera.mount_height = get_or(c, "mount_height", s.camera.mount_height);
    s.camera.mount_radius = get_or(c, "mount_radius", s.camera.mount_radius);
    s.camera.yaw_step_deg = get_or(c, "yaw_step_deg", s.camera.yaw_step_deg);
  }
  const Json objects = j.value("objects", Json("standard"));
  if (objects.is_string()) {
    if (objects.get<std::string>() != "standard")
      throw Error(Errc::ConfigError, "objects must be \"standard\" or a list of boxes");
    s.objects = standard_scene_spec(s.seed).objects;
  } else if (objects.is_array()) {
    for (const auto& o : objects) {
      SceneObject obj;
      obj.center = vec3_from_json(get_req<Json>(o, "center"), "center");
      obj.size = vec3_from_json(get_req<Json>(o, "size"), "size");
      if (o.contains("signature")) obj.signature = o["signature"].get<std::vector<float>>();
      s.objects.push_back(std::move(obj));
    }
  } else {
    throw Error(Errc::ConfigError, "objects must be \"standard\" or a list of boxes");
  }
  if (j.contains("grid")) doc.grid = grid_from_json(j["grid"]);
  if (j.contains("depth")) doc.depth = depth_from_json(j["depth"]);
  try {
    s.validate(doc.grid);
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, e.what());
  }
  return doc;
}

Json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ConfigError, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(Errc::ConfigError, path.string() + ": " + e.what());
  }
}

void save_scene(const SceneBundle& bundle, std::uint64_t seed, const BevGridSpec& grid,
                const DepthBinSpec& depth, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  Json manifest;
  manifest["format"] = "dualbev-scene";
  manifest["version"] = 1;
  manifest["seed"] = seed;
  manifest["grid"] = grid_to_json(grid);
  manifest["depth"] = depth_to_json(depth);
  manifest["cameras"] = Json::array();
  for (std::size_t cam = 0; cam < bundle.rigs.size(); ++cam) {
    const std::string idx = std::to_string(cam);
    tensor_write(bundle.views.features.slice(cam), dir / ("feat_" + idx + ".btsr"));
    tensor_write(bundle.views.depth.slice(cam), dir / ("depth_" + idx + ".btsr"));
    tensor_write(bundle.views.mask.slice(cam), dir / ("mask_" + idx + ".btsr"));
    Json entry = rig_to_json(bundle.rigs[cam]);
    entry["features"] = "feat_" + idx + ".btsr";
    entry["depth"] = "depth_" + idx + ".btsr";
    entry["mask"] = "mask_" + idx + ".btsr";
    manifest["cameras"].push_back(entry);
  }
  tensor_write(bundle.gt_bev, dir / "gt_bev.btsr");
  manifest["gt_bev"] = "gt_bev.btsr";
  std::ofstream out(dir / "manifest.json");
  if (!out) throw Error(Errc::IoFailure, "cannot write scene manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

SceneOnDisk load_scene(const std::filesystem::path& dir) {
  const Json manifest = parse_json_file(dir / "manifest.json");
  if (manifest.value("format", "") != "dualbev-scene")
    throw Error(Errc::ConfigError, "not a dualbev scene manifest: " + dir.string());
  SceneOnDisk scene;
  scene.grid = grid_from_json(manifest.value("grid", Json::object()));
  scene.depth = depth_from_json(manifest.value("depth", Json::object()));
  std::vector<Tensor> feats, depths, masks;
  const auto cams = get_req<Json>(manifest, "cameras");
  if (!cams.is_array() || cams.empty()) throw Error(Errc::ConfigError, "scene has no cameras");
  for (const auto& c : cams) {
    scene.rigs.push_back(rig_from_json(c));
    feats.push_back(tensor_read(dir / get_req<std::string>(c, "features")));
    depths.push_back(tensor_read(dir / get_req<std::string>(c, "depth")));
    masks.push_back(tensor_read(dir / get_req<std::string>(c, "mask")));
  }
  scene.views = {stack(feats), stack(depths), stack(masks)};
  if (manifest.contains("gt_bev")) scene.gt_bev = tensor_read(dir / manifest["gt_bev"].get<std::string>());
  return scene;
}

void apply_ablation(PipelineOptions& options, const std::string& name) {
  if (name == "uniform-D") options.uniform_depth = true;
  else if (name == "disable-M") options.disable_mask = true;
  else if (name == "force-P") options.force_prob_one = true;
  else if (name == "force-A") options.force_affinity = 1.0f;
  else throw Error(Errc::ConfigError, "unknown ablation '" + name + "'");
}

void set_ht_path(PipelineOptions& options, const std::string& path, const std::string& sampler) {
  if (sampler != "round" && sampler != "interp")
    throw Error(Errc::ConfigError, "sampler must be 'round' or 'interp'");
  if (path == "fast") {
    if (sampler == "interp")
      throw Error(Errc::ConfigError, "the table-driven path only supports the round sampler");
    options.ht_path = HtPath::Fast;
  } else if (path == "naive") {
    options.ht_path = sampler == "round" ? HtPath::NaiveRound : HtPath::NaiveInterp;
  } else {
    throw Error(Errc::ConfigError, "ht_path must be 'fast' or 'naive'");
  }
}

RunConfig run_config_from_json(const Json& j, const std::filesystem::path& base) {
  if (!j.is_object()) throw Error(Errc::ConfigError, "run config must be a JSON object");
  RunConfig cfg;
  cfg.scene_dir = resolve(base, get_or<std::string>(j, "scene_dir", ""));
  cfg.ht_table = resolve(base, get_or<std::string>(j, "ht_table", ""));
  cfg.lss_table = resolve(base, get_or<std::string>(j, "lss_table", ""));
  cfg.weights_dir = resolve(base, get_or<std::string>(j, "weights_dir", ""));
  cfg.output_dir = resolve(base, get_or<std::string>(j, "output_dir", ""));
  cfg.weight_seed = get_or<std::uint64_t>(j, "weight_seed", cfg.weight_seed);
  if (j.contains("rigs")) {
    std::vector<CameraRig> rigs;
    for (const auto& r : j["rigs"]) rigs.push_back(rig_from_json(r));
    if (rigs.empty()) throw Error(Errc::ConfigError, "rigs list is empty");
    cfg.rigs = std::move(rigs);
  }
  if (j.contains("grid")) cfg.grid = grid_from_json(j["grid"]);
  if (j.contains("depth")) cfg.depth = depth_from_json(j["depth"]);
  if (j.contains("heights")) cfg.heights = heights_from_json(j["heights"]);
  set_ht_path(cfg.options, get_or<std::string>(j, "ht_path", "fast"),
              get_or<std::string>(j, "sampler", "round"));
  const auto mode = get_or<std::string>(j, "weight_mode", "depth_mask");
  if (mode == "depth_mask") cfg.options.lss_mode = WeightMode::DepthMask;
  else if (mode == "depth_only") cfg.options.lss_mode = WeightMode::DepthOnly;
  else throw Error(Errc::ConfigError, "weight_mode must be 'depth_mask' or 'depth_only'");
  for (const auto& a : get_or<std::vector<std::string>>(j, "ablate", {})) apply_ablation(cfg.options, a);
  cfg.options.threads = get_or(j, "threads", 1);
  if (cfg.options.threads < 1) throw Error(Errc::ConfigError, "threads must be >= 1");
  if (j.contains("bench")) {
    cfg.bench.repetitions = get_or(j["bench"], "repetitions", cfg.bench.repetitions);
    cfg.bench.warmup = get_or(j["bench"], "warmup", cfg.bench.warmup);
  }
  return cfg;
}

}  // namespace dualbev
