#include "dualbev/heighttrans.hpp"

#include <cmath>
#include <vector>

#include "dualbev/error.hpp"

namespace dualbev {
namespace {

void check_rigs(std::span<const CameraRig> rigs) {
  if (rigs.empty()) throw Error(Errc::NoCameras, "no camera rigs given");
  for (const auto& r : rigs) {
    r.validate();
    if (r.feat_w != rigs.front().feat_w || r.feat_h != rigs.front().feat_h)
      throw Error(Errc::ShapeMismatch, "all cameras must share one feature geometry");
  }
}

void check_inputs_against_rigs(const ViewInputs& in, std::span<const CameraRig> rigs,
                               const DepthBinSpec& dspec) {
  in.validate(&dspec);
  if (in.n_cams() != rigs.size())
    throw Error(Errc::ShapeMismatch, "tensors carry " + std::to_string(in.n_cams()) +
                                         " cameras, rig set has " + std::to_string(rigs.size()));
  if (in.width() != static_cast<std::size_t>(rigs.front().feat_w) ||
      in.height() != static_cast<std::size_t>(rigs.front().feat_h))
    throw Error(Errc::ShapeMismatch, "feature extents differ from the rig geometry");
}

}  // namespace

std::optional<RoundedHit> round_projection(const Projection<double>& p, int width, int height,
                                           const DepthBinSpec& dspec) noexcept {
  const double u = std::round(p.u);
  const double v = std::round(p.v);
  const double k = std::round(depth_to_coord(p.d, dspec));
  if (!(u >= 0.0 && u <= width - 1.0 && v >= 0.0 && v <= height - 1.0)) return std::nullopt;
  if (!(k >= 0.0 && k <= dspec.n_bins() - 1.0)) return std::nullopt;
  return RoundedHit{static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v),
                    static_cast<std::uint32_t>(k)};
}

HtLookupTable precompute_ht_table(std::span<const CameraRig> rigs, const BevGridSpec& grid,
                                  const HeightSet& heights, const DepthBinSpec& dspec) {
  check_rigs(rigs);
  grid.validate();
  dspec.validate();
  const int w = rigs.front().feat_w, h = rigs.front().feat_h;
  const std::uint32_t plane = static_cast<std::uint32_t>(w * h);
  TableGeometry geom{static_cast<std::uint32_t>(rigs.size()), static_cast<std::uint32_t>(h),
                     static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(dspec.n_bins()),
                     static_cast<std::uint32_t>(grid.ny), static_cast<std::uint32_t>(grid.nx)};

  std::vector<PoolRecord> records;
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const Eigen::Vector2d xy = grid.cell_center(i, j);
      const auto cell = static_cast<std::uint32_t>(j * grid.nx + i);
      for (std::size_t cam = 0; cam < rigs.size(); ++cam)
        for (double z : heights.z_values) {
          const auto proj = project_point(Eigen::Vector3d(xy.x(), xy.y(), z), rigs[cam]);
          if (!proj) continue;
          const auto hit = round_projection(*proj, w, h, dspec);
          if (!hit) continue;
          const std::uint32_t feat = hit->v * static_cast<std::uint32_t>(w) + hit->u;
          records.push_back({cell, static_cast<std::uint32_t>(cam), feat, hit->bin * plane + feat});
        }
    }
  return HtLookupTable(geom, std::move(records));
}

Tensor ht_transform_naive(const ViewInputs& inputs, std::span<const CameraRig> rigs,
                          const BevGridSpec& grid, const HeightSet& heights,
                          const DepthBinSpec& dspec, SamplerMode mode) {
  check_rigs(rigs);
  grid.validate();
  dspec.validate();
  check_inputs_against_rigs(inputs, rigs, dspec);

  const std::size_t channels = inputs.channels(), hgt = inputs.height(), wid = inputs.width();
  const std::size_t plane = hgt * wid, bins = inputs.n_bins(), cells = grid.n_cells();
  const float* feat = inputs.features.ptr();
  const float* depth = inputs.depth.ptr();
  const float* mask = inputs.mask.ptr();

  Tensor out({channels, static_cast<std::size_t>(grid.ny), static_cast<std::size_t>(grid.nx)});
  float* dst = out.ptr();
  std::vector<double> acc(channels);

  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const Eigen::Vector2d xy = grid.cell_center(i, j);
      const std::size_t cell = static_cast<std::size_t>(j) * grid.nx + i;
      std::fill(acc.begin(), acc.end(), 0.0);
      bool touched = false;
      for (std::size_t cam = 0; cam < rigs.size(); ++cam) {
        const float* f_cam = feat + cam * channels * plane;
        const float* d_cam = depth + cam * bins * plane;
        const float* m_cam = mask + cam * plane;
        for (double z : heights.z_values) {
          const auto proj = project_point(Eigen::Vector3d(xy.x(), xy.y(), z), rigs[cam]);
          if (!proj) continue;
          if (mode == SamplerMode::Round) {
            const auto hit = round_projection(*proj, static_cast<int>(wid), static_cast<int>(hgt), dspec);
            if (!hit) continue;
            const std::size_t p = hit->v * wid + hit->u;
            const double dm = static_cast<double>(d_cam[hit->bin * plane + p]) * static_cast<double>(m_cam[p]);
            for (std::size_t c = 0; c < channels; ++c)
              acc[c] += dm * static_cast<double>(f_cam[c * plane + p]);
            touched = true;
          } else {
            const BilinearTaps taps(proj->u, proj->v, hgt, wid);
            if (taps.count == 0) continue;
            const double dw = trilinear_sample_3d(d_cam, bins, hgt, wid, proj->u, proj->v, proj->d, dspec);
            if (dw == 0.0) continue;
            for (std::size_t c = 0; c < channels; ++c) {
              const float* plane_c = f_cam + c * plane;
              double s = 0.0;
              for (int t = 0; t < taps.count; ++t)
                s += taps.weight[t] * (static_cast<double>(m_cam[taps.index[t]]) *
                                       static_cast<double>(plane_c[taps.index[t]]));
              acc[c] += dw * s;
            }
            touched = true;
          }
        }
      }
      if (!touched) continue;
      for (std::size_t c = 0; c < channels; ++c) dst[c * cells + cell] = static_cast<float>(acc[c]);
    }
  return out;
}

Tensor ht_transform_fast(const ViewInputs& inputs, const HtLookupTable& table, int threads) {
  return pool_scatter(inputs, table, PoolWeight::DepthMask, threads);
}

}  // namespace dualbev
