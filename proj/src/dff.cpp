#include "dualbev/dff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dualbev/error.hpp"
#include "dualbev/sampling.hpp"

namespace dualbev {
namespace {

void require_same(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape())
    throw Error(Errc::ShapeMismatch, std::string(what) + ": " + shape_string(a.shape()) + " vs " +
                                         shape_string(b.shape()));
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  Tensor out({a.dim(0) + b.dim(0), a.dim(1), a.dim(2)});
  std::copy(a.data().begin(), a.data().end(), out.data().begin());
  std::copy(b.data().begin(), b.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(a.size()));
  return out;
}

// x [C, H, W] plus a per-channel [C, 1, 1] offset.
Tensor add_broadcast(const Tensor& x, const Tensor& per_channel) {
  Tensor out = x;
  const std::size_t plane = x.dim(1) * x.dim(2);
  for (std::size_t c = 0; c < x.dim(0); ++c)
    out.array().segment(static_cast<Eigen::Index>(c * plane), static_cast<Eigen::Index>(plane)) +=
        per_channel[c];
  return out;
}

Tensor scale_channels(const Tensor& x, const Tensor& per_channel) {
  Tensor out = x;
  const std::size_t plane = x.dim(1) * x.dim(2);
  for (std::size_t c = 0; c < x.dim(0); ++c)
    out.array().segment(static_cast<Eigen::Index>(c * plane), static_cast<Eigen::Index>(plane)) *=
        per_channel[c];
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  Tensor out = a;
  out.array() += b.array();
  return out;
}

}  // namespace

void CafConfig::validate() const {
  if (channels == 0 || ratio == 0 || channels % ratio != 0)
    throw Error(Errc::ConfigError, "CAF ratio must divide the channel count");
}

void ProbNetConfig::validate() const {
  if (channels == 0 || reduction == 0 || channels % reduction != 0 || gate_ratio == 0)
    throw Error(Errc::ConfigError, "ProbNet reduction must divide the channel count");
}

std::vector<ConvSpec> caf_weight_specs(const CafConfig& cfg) {
  cfg.validate();
  const std::size_t c = cfg.channels, h = cfg.hidden();
  return {{"caf.reduce", c, 2 * c, 1, 1},
          {"caf.local.fc1", h, c, 1, 1},
          {"caf.local.fc2", c, h, 1, 1},
          {"caf.global.fc1", h, c, 1, 1},
          {"caf.global.fc2", c, h, 1, 1}};
}

std::vector<ConvSpec> probnet_weight_specs(const ProbNetConfig& cfg) {
  cfg.validate();
  const std::size_t c = cfg.channels, r = cfg.reduced(), g = cfg.gate_hidden();
  return {{"prob.local.reduce", r, c, 3, 3},
          {"prob.local.res.conv1", r, r, 3, 3},
          {"prob.local.res.conv2", r, r, 3, 3},
          {"prob.local.gate.fc1", g, r, 1, 1},
          {"prob.local.gate.fc2", r, g, 1, 1},
          {"prob.local.head", 1, r, 1, 1},
          {"prob.global.conv", 1, 2, 7, 7}};
}

std::vector<ConvSpec> dff_weight_specs(const DffConfig& cfg) {
  auto specs = caf_weight_specs(cfg.caf);
  auto prob = probnet_weight_specs(cfg.prob);
  specs.insert(specs.end(), prob.begin(), prob.end());
  return specs;
}

CafOutput caf_fuse(const Tensor& f_lss, const Tensor& f_ht, const WeightBundle& weights,
                   const CafConfig& cfg, std::optional<float> forced_affinity) {
  require_same(f_lss, f_ht, "caf_fuse");
  if (f_lss.rank() != 3 || f_lss.dim(0) != cfg.channels)
    throw Error(Errc::ShapeMismatch, "caf_fuse expects [" + std::to_string(cfg.channels) +
                                         ",H,W], got " + shape_string(f_lss.shape()));
  Tensor affinity;
  if (forced_affinity) {
    affinity = Tensor::full(f_lss.shape(), *forced_affinity);
  } else {
    const Tensor z = conv2d(concat_channels(f_lss, f_ht), weights.at("caf.reduce"));
    const Tensor local =
        conv2d(relu(conv2d(z, weights.at("caf.local.fc1"))), weights.at("caf.local.fc2"));
    const Tensor global = conv2d(relu(conv2d(global_avg_pool(z), weights.at("caf.global.fc1"))),
                                 weights.at("caf.global.fc2"));
    affinity = sigmoid(add_broadcast(local, global));
  }

  Tensor fused(f_lss.shape());
  for (std::size_t i = 0; i < fused.size(); ++i) {
    const double l = f_lss[i], h = f_ht[i], a = affinity[i];
    // h + a (l - h) keeps equal operands and a = 0 or 1 exact; the clamp pins
    // the result to the closed interval spanned by the operands.
    const double mixed = a == 1.0 ? l : h + a * (l - h);
    fused[i] = static_cast<float>(std::clamp(mixed, std::min(l, h), std::max(l, h)));
  }
  return {std::move(fused), std::move(affinity)};
}

Tensor bev_probability(const Tensor& f_channel, const WeightBundle& weights, const ProbNetConfig& cfg) {
  if (f_channel.rank() != 3 || f_channel.dim(0) != cfg.channels)
    throw Error(Errc::ShapeMismatch, "bev_probability expects [" + std::to_string(cfg.channels) +
                                         ",H,W], got " + shape_string(f_channel.shape()));
  const Tensor reduced = relu(conv2d(f_channel, weights.at("prob.local.reduce")));
  const Tensor branch = conv2d(relu(conv2d(reduced, weights.at("prob.local.res.conv1"))),
                               weights.at("prob.local.res.conv2"));
  const Tensor residual = add(reduced, branch);
  const Tensor gate = sigmoid(conv2d(relu(conv2d(global_avg_pool(residual), weights.at("prob.local.gate.fc1"))),
                                     weights.at("prob.local.gate.fc2")));
  const Tensor local = conv2d(scale_channels(residual, gate), weights.at("prob.local.head"));
  const Tensor global = conv2d(channel_stats(f_channel), weights.at("prob.global.conv"));

  Tensor prob = sigmoid(add(local, global));
  // Saturated logits round to exactly 0 or 1 in float; keep P in the open interval.
  const float lo = std::numeric_limits<float>::denorm_min();
  const float hi = std::nextafter(1.0f, 0.0f);
  prob.array() = prob.array().max(lo).min(hi);
  return prob;
}

Tensor assemble_final(const Tensor& f_channel, const Tensor& prob) {
  if (f_channel.rank() != 3 || prob.rank() != 3 || prob.dim(0) != 1 ||
      prob.dim(1) != f_channel.dim(1) || prob.dim(2) != f_channel.dim(2))
    throw Error(Errc::ShapeMismatch, "assemble_final: " + shape_string(f_channel.shape()) + " vs " +
                                         shape_string(prob.shape()));
  Tensor out = f_channel;
  const auto plane = static_cast<Eigen::Index>(prob.size());
  for (std::size_t c = 0; c < f_channel.dim(0); ++c)
    out.array().segment(static_cast<Eigen::Index>(c) * plane, plane) *= prob.array();
  return out;
}

PrecomputedTables precompute_tables(const ViewGeometry& geometry) {
  return {precompute_ht_table(geometry.rigs, geometry.grid, geometry.heights, geometry.depth),
          precompute_lss_table(geometry.rigs, geometry.grid, geometry.depth)};
}

ViewInputs apply_input_ablations(const ViewInputs& inputs, const PipelineOptions& options) {
  ViewInputs out = inputs;
  if (options.uniform_depth)
    out.depth = Tensor::full(inputs.depth.shape(), 1.0f / static_cast<float>(inputs.n_bins()));
  if (options.disable_mask) out.mask = Tensor::full(inputs.mask.shape(), 1.0f);
  return out;
}

DualBevResult run_dualbev(const ViewInputs& raw_inputs, const ViewGeometry& geometry,
                          const PrecomputedTables* tables, const WeightBundle& weights,
                          const DffConfig& cfg, const PipelineOptions& options) {
  raw_inputs.validate(&geometry.depth);
  check_mask_range(raw_inputs.mask);
  if (raw_inputs.channels() != cfg.caf.channels || raw_inputs.channels() != cfg.prob.channels)
    throw Error(Errc::ShapeMismatch, "feature channels differ from the fusion config");

  DualBevResult result;
  result.unnormalized_depth_columns = count_unnormalized_columns(raw_inputs.depth);
  const ViewInputs inputs = apply_input_ablations(raw_inputs, options);

  std::optional<PrecomputedTables> built;
  if (!tables) {
    built = precompute_tables(geometry);
    tables = &*built;
  }

  switch (options.ht_path) {
    case HtPath::Fast:
      result.f_ht = ht_transform_fast(inputs, tables->ht, options.threads);
      break;
    case HtPath::NaiveRound:
      result.f_ht = ht_transform_naive(inputs, geometry.rigs, geometry.grid, geometry.heights,
                                       geometry.depth, SamplerMode::Round);
      break;
    case HtPath::NaiveInterp:
      result.f_ht = ht_transform_naive(inputs, geometry.rigs, geometry.grid, geometry.heights,
                                       geometry.depth, SamplerMode::Interp);
      break;
  }
  result.f_lss = lss_pool(inputs, tables->lss, options.lss_mode, options.threads);

  auto caf = caf_fuse(result.f_lss, result.f_ht, weights, cfg.caf, options.force_affinity);
  result.f_channel = std::move(caf.fused);
  result.affinity = std::move(caf.affinity);
  result.prob = options.force_prob_one
                    ? Tensor::full({1, result.f_channel.dim(1), result.f_channel.dim(2)}, 1.0f)
                    : bev_probability(result.f_channel, weights, cfg.prob);
  result.fused = assemble_final(result.f_channel, result.prob);
  return result;
}

OccupancyStats occupancy_stats(const Tensor& feature, const Tensor& gt_bev) {
  if (feature.rank() != 3 || gt_bev.rank() != 3 || gt_bev.dim(0) != 1 ||
      gt_bev.dim(1) != feature.dim(1) || gt_bev.dim(2) != feature.dim(2))
    throw Error(Errc::ShapeMismatch, "occupancy_stats: " + shape_string(feature.shape()) + " vs " +
                                         shape_string(gt_bev.shape()));
  const std::size_t plane = gt_bev.size();
  OccupancyStats s;
  double occ = 0.0, empty = 0.0;
  for (std::size_t p = 0; p < plane; ++p) {
    double e = 0.0;
    for (std::size_t c = 0; c < feature.dim(0); ++c) {
      const double v = feature[c * plane + p];
      e += v * v;
    }
    e = std::sqrt(e);
    if (gt_bev[p] > 0.5f) {
      occ += e;
      ++s.occupied_cells;
    } else {
      empty += e;
      ++s.empty_cells;
    }
  }
  s.mean_occupied = s.occupied_cells ? occ / static_cast<double>(s.occupied_cells) : 0.0;
  s.mean_empty = s.empty_cells ? empty / static_cast<double>(s.empty_cells) : 0.0;
  return s;
}

}  // namespace dualbev
