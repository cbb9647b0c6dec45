#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dualbev/dff.hpp"
#include "dualbev/synth.hpp"

namespace dualbev {

using Json = nlohmann::ordered_json;

// JSON schema pieces. Every parser throws ConfigError on malformed input.
//
// rig:    {"cam_id": 0, "feat_w": 44, "feat_h": 16,
//          "K": [[fx,0,cx],[0,fy,cy],[0,0,1]], "T": [[...4 rows of 4...]]}
// grid:   {"x_min": -51.2, "x_max": 51.2, "y_min": -51.2, "y_max": 51.2, "nx": 128, "ny": 128}
// depth:  {"d_min": 2.0, "d_max": 58.0, "step": 0.5}
// heights: {"mode": "multires"} | {"mode": "uniform", "n": 8}
Json rig_to_json(const CameraRig& rig);
CameraRig rig_from_json(const Json& j);
Json grid_to_json(const BevGridSpec& g);
BevGridSpec grid_from_json(const Json& j);
Json depth_to_json(const DepthBinSpec& d);
DepthBinSpec depth_from_json(const Json& j);
Json heights_to_json(const HeightMode& m);
HeightMode heights_from_json(const Json& j);

// Scene spec: {"seed": 5, "n_cameras": 6, "feat_w": 44, "feat_h": 16,
//   "channels": 64, "kappa": 4, "noise_sigma": 0.05,
//   "camera": {"fx", "fy", "cx", "cy", "mount_height", "mount_radius", "yaw_step_deg"},
//   "objects": "standard" | [{"center": [x,y,z], "size": [l,w,h], "signature": [...]}],
//   "grid": {...}, "depth": {...}}
struct SceneDocument {
  SceneSpec spec;
  BevGridSpec grid;
  DepthBinSpec depth;
};
SceneDocument scene_document_from_json(const Json& j);

Json parse_json_file(const std::filesystem::path& path);

/// A scene directory: manifest.json plus per-camera feat_<i>, depth_<i>,
/// mask_<i> BTSR files and gt_bev.btsr.
struct SceneOnDisk {
  std::vector<CameraRig> rigs;
  ViewInputs views;
  std::optional<Tensor> gt_bev;
  BevGridSpec grid;
  DepthBinSpec depth;
};
void save_scene(const SceneBundle& bundle, std::uint64_t seed, const BevGridSpec& grid,
                const DepthBinSpec& depth, const std::filesystem::path& dir);
SceneOnDisk load_scene(const std::filesystem::path& dir);

struct BenchSettings {
  int repetitions = 10;
  int warmup = 2;
};

/// Everything a precompute / transform / bench run needs. Unset geometry
/// falls back to the scene manifest, then to the library defaults.
struct RunConfig {
  std::filesystem::path scene_dir;
  std::filesystem::path ht_table;
  std::filesystem::path lss_table;
  std::filesystem::path weights_dir;
  std::filesystem::path output_dir;
  std::optional<std::vector<CameraRig>> rigs;
  std::optional<BevGridSpec> grid;
  std::optional<DepthBinSpec> depth;
  HeightMode heights = HeightMode::multi_res();
  PipelineOptions options;
  std::uint64_t weight_seed = 11;
  BenchSettings bench;
};

// Run config JSON keys: scene_dir, ht_table, lss_table, weights_dir,
// weight_seed, output_dir, rigs, grid, depth, heights,
// sampler ("round" | "interp"), ht_path ("fast" | "naive"),
// weight_mode ("depth_mask" | "depth_only"),
// ablate (["uniform-D", "disable-M", "force-P", "force-A"]), threads,
// bench {"repetitions", "warmup"}. Relative paths resolve against `base`.
RunConfig run_config_from_json(const Json& j, const std::filesystem::path& base = {});

/// Applies one ablation name; throws ConfigError for unknown names.
void apply_ablation(PipelineOptions& options, const std::string& name);
/// Sets options.ht_path from the sampler / path pair.
void set_ht_path(PipelineOptions& options, const std::string& path, const std::string& sampler);

}  // namespace dualbev
