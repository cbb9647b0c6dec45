#pragma once

#include <optional>
#include <vector>

#include "dualbev/geometry.hpp"
#include "dualbev/heighttrans.hpp"
#include "dualbev/inputs.hpp"
#include "dualbev/problss.hpp"
#include "dualbev/weights.hpp"

namespace dualbev {

// Channel-attention fusion. The concatenated streams [2C] are reduced to C
// by a 1x1 conv; a local branch (1x1 C->C/r, relu, 1x1 C/r->C) and a global
// branch (average pool, then the same pair) are summed and squashed into a
// per-channel, per-position affinity A.
//
// Weight names: caf.reduce, caf.local.fc1, caf.local.fc2, caf.global.fc1,
// caf.global.fc2.
struct CafConfig {
  std::size_t channels = 64;
  std::size_t ratio = 4;

  void validate() const;
  [[nodiscard]] std::size_t hidden() const noexcept { return channels / ratio; }
};

// BEV probability net. Local stream: 3x3 conv C->C/4 + relu, residual block
// (3x3, relu, 3x3, add) followed by a channel gate, then a 1x1 conv to one
// logit plane. Global stream: channel mean/max planes through a 7x7 conv.
//
// Weight names: prob.local.reduce, prob.local.res.conv1, prob.local.res.conv2,
// prob.local.gate.fc1, prob.local.gate.fc2, prob.local.head, prob.global.conv.
struct ProbNetConfig {
  std::size_t channels = 64;
  std::size_t reduction = 4;
  std::size_t gate_ratio = 4;

  void validate() const;
  [[nodiscard]] std::size_t reduced() const noexcept { return channels / reduction; }
  [[nodiscard]] std::size_t gate_hidden() const noexcept {
    return std::max<std::size_t>(1, reduced() / gate_ratio);
  }
};

struct DffConfig {
  CafConfig caf;
  ProbNetConfig prob;

  static DffConfig for_channels(std::size_t channels) {
    return {CafConfig{channels, 4}, ProbNetConfig{channels, 4, 4}};
  }
};

std::vector<ConvSpec> caf_weight_specs(const CafConfig& cfg);
std::vector<ConvSpec> probnet_weight_specs(const ProbNetConfig& cfg);
std::vector<ConvSpec> dff_weight_specs(const DffConfig& cfg);

struct CafOutput {
  Tensor fused;     // F_channel [C, ny, nx]
  Tensor affinity;  // A [C, ny, nx]
};

/// F_channel = A * F_lss + (1 - A) * F_ht with A from the attention branches,
/// or A fixed to `forced_affinity` when given.
CafOutput caf_fuse(const Tensor& f_lss, const Tensor& f_ht, const WeightBundle& weights,
                   const CafConfig& cfg, std::optional<float> forced_affinity = std::nullopt);

/// sigmoid(local + global logits) as [1, ny, nx], kept strictly inside (0, 1).
Tensor bev_probability(const Tensor& f_channel, const WeightBundle& weights, const ProbNetConfig& cfg);

/// F[c, i, j] = P[0, i, j] * F_channel[c, i, j].
Tensor assemble_final(const Tensor& f_channel, const Tensor& prob);

enum class HtPath { Fast, NaiveRound, NaiveInterp };

/// Switches for the probability ablations and execution paths.
struct PipelineOptions {
  HtPath ht_path = HtPath::Fast;
  WeightMode lss_mode = WeightMode::DepthMask;
  bool uniform_depth = false;  // replace D by 1 / C_D
  bool disable_mask = false;   // replace M by 1
  bool force_prob_one = false; // P = 1
  std::optional<float> force_affinity;
  int threads = 1;
};

/// Static geometry shared by both streams.
struct ViewGeometry {
  std::vector<CameraRig> rigs;
  BevGridSpec grid;
  HeightSet heights = make_height_samples(HeightMode::multi_res());
  DepthBinSpec depth;
};

struct PrecomputedTables {
  HtLookupTable ht;
  LssPoolTable lss;
};

PrecomputedTables precompute_tables(const ViewGeometry& geometry);

struct DualBevResult {
  Tensor f_lss;
  Tensor f_ht;
  Tensor f_channel;
  Tensor affinity;
  Tensor prob;
  Tensor fused;
  std::size_t unnormalized_depth_columns = 0;
};

/// Full view transformation: HeightTrans and Prob-LSS streams, channel
/// attention fusion, BEV probability, final feature. `tables` may be null,
/// in which case they are built from `geometry`.
DualBevResult run_dualbev(const ViewInputs& inputs, const ViewGeometry& geometry,
                          const PrecomputedTables* tables, const WeightBundle& weights,
                          const DffConfig& cfg, const PipelineOptions& options);

/// Applies the uniform-depth / disabled-mask ablations to a copy of `inputs`.
ViewInputs apply_input_ablations(const ViewInputs& inputs, const PipelineOptions& options);

/// Mean per-cell feature energy (L2 over channels) on occupied and empty
/// cells of a [1, ny, nx] ground-truth mask.
struct OccupancyStats {
  double mean_occupied = 0.0;
  double mean_empty = 0.0;
  std::size_t occupied_cells = 0;
  std::size_t empty_cells = 0;

  [[nodiscard]] double separation() const noexcept { return mean_occupied - mean_empty; }
};

OccupancyStats occupancy_stats(const Tensor& feature, const Tensor& gt_bev);

}  // namespace dualbev
