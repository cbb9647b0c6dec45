#pragma once

// Shared fixtures and independent reference implementations for the tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dualbev/dff.hpp"
#include "dualbev/heighttrans.hpp"
#include "dualbev/problss.hpp"
#include "dualbev/rng.hpp"
#include "dualbev/synth.hpp"

namespace fixtures {

using namespace dualbev;

/// Random I, normalized D and M in [0, 1] for `n_cams` cameras.
inline ViewInputs random_inputs(std::uint64_t seed, std::size_t n_cams, std::size_t channels,
                                std::size_t h, std::size_t w, std::size_t bins,
                                float feat_lo = -1.0f) {
  Rng rng(seed);
  ViewInputs in;
  in.features = rng_uniform(rng, {n_cams, channels, h, w}, feat_lo, 1.0f);
  in.depth = rng_uniform(rng, {n_cams, bins, h, w}, 0.0f, 1.0f);
  in.mask = rng_uniform(rng, {n_cams, 1, h, w}, 0.0f, 1.0f);
  const std::size_t plane = h * w;
  float* d = in.depth.ptr();
  for (std::size_t n = 0; n < n_cams; ++n)
    for (std::size_t p = 0; p < plane; ++p) {
      double sum = 0.0;
      for (std::size_t k = 0; k < bins; ++k) sum += d[(n * bins + k) * plane + p];
      for (std::size_t k = 0; k < bins; ++k)
        d[(n * bins + k) * plane + p] = static_cast<float>(d[(n * bins + k) * plane + p] / sum);
    }
  return in;
}

/// Bandlimited features, depth Gaussian over bins drifting with image row,
/// unit mask.
inline ViewInputs smooth_inputs(std::size_t n_cams, std::size_t channels, std::size_t h,
                                std::size_t w, std::size_t bins) {
  ViewInputs in{Tensor({n_cams, channels, h, w}), Tensor({n_cams, bins, h, w}),
                Tensor::full({n_cams, 1, h, w}, 1.0f)};
  std::vector<double> g(bins);
  for (std::size_t n = 0; n < n_cams; ++n)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        for (std::size_t c = 0; c < channels; ++c)
          in.features[((n * channels + c) * h + y) * w + x] = static_cast<float>(
              1.0 + 0.5 * std::sin(0.15 * x + 0.3 * c) * std::cos(0.2 * y + 0.1 * n));
        const double mu = 20.0 + 2.0 * y, sigma = 12.0;
        double sum = 0.0;
        for (std::size_t k = 0; k < bins; ++k)
          sum += g[k] = std::exp(-0.5 * std::pow((static_cast<double>(k) - mu) / sigma, 2));
        for (std::size_t k = 0; k < bins; ++k)
          in.depth[((n * bins + k) * h + y) * w + x] = static_cast<float>(g[k] / sum);
      }
  return in;
}

/// Synthetic scene with 1..4 random boxes inside +-30 m and a jittered camera ring.
inline SceneBundle random_scene(std::uint64_t seed, const BevGridSpec& grid = {},
                                const DepthBinSpec& dspec = {}, int channels = 64) {
  std::mt19937_64 gen(seed * 7919 + 1);
  std::uniform_real_distribution<double> pos(-30.0, 30.0), len(1.5, 6.0), hgt(1.0, 3.0);
  std::uniform_real_distribution<double> yaw(50.0, 70.0), mount(1.2, 1.8);
  SceneSpec spec;
  spec.seed = seed;
  spec.channels = channels;
  spec.camera.yaw_step_deg = yaw(gen);
  spec.camera.mount_height = mount(gen);
  const int n_obj = 1 + static_cast<int>(gen() % 4);
  for (int i = 0; i < n_obj; ++i) {
    SceneObject o;
    const double h = hgt(gen);
    o.center = {pos(gen), pos(gen), h / 2};
    o.size = {len(gen), len(gen) / 2, h};
    spec.objects.push_back(o);
  }
  return generate_scene(spec, grid, dspec);
}

/// Camera at the ego origin looking along +x, at feature resolution w x h.
inline CameraRig forward_camera(int w, int h, double f = 32.0, double mount_z = 0.0) {
  CameraRig cam;
  cam.feat_w = w;
  cam.feat_h = h;
  cam.K << f, 0, (w - 1) / 2.0, 0, f, (h - 1) / 2.0, 0, 0, 1;
  // camera x = -ego y, camera y = -(ego z - mount_z), camera z = ego x
  cam.T.setIdentity();
  cam.T.topLeftCorner<3, 3>() << 0, -1, 0, 0, 0, -1, 1, 0, 0;
  cam.T(1, 3) = mount_z;
  return cam;
}

/// Per-point LSS reference: lifts each frustum point, locates its cell with
/// its own floor arithmetic and accumulates in lift order without a table.
inline Tensor lss_naive_loop(const ViewInputs& in, std::span<const CameraRig> rigs,
                             const BevGridSpec& grid, const DepthBinSpec& dspec, bool use_mask) {
  const std::size_t C = in.channels(), H = in.height(), W = in.width(), B = in.n_bins();
  const std::size_t plane = H * W, cells = grid.n_cells();
  std::vector<std::vector<double>> acc(cells);
  const double cw = (grid.x_max - grid.x_min) / grid.nx, ch = (grid.y_max - grid.y_min) / grid.ny;
  for (std::size_t cam = 0; cam < rigs.size(); ++cam)
    for (const auto& pt : lift_frustum(rigs[cam], dspec)) {
      const double x = pt.ego.x(), y = pt.ego.y();
      if (x < grid.x_min || x >= grid.x_max || y < grid.y_min || y >= grid.y_max) continue;
      const long i = std::min<long>(static_cast<long>(std::floor((x - grid.x_min) / cw)), grid.nx - 1);
      const long j = std::min<long>(static_cast<long>(std::floor((y - grid.y_min) / ch)), grid.ny - 1);
      auto& a = acc[static_cast<std::size_t>(j * grid.nx + i)];
      if (a.empty()) a.assign(C, 0.0);
      const std::size_t p = static_cast<std::size_t>(pt.v) * W + static_cast<std::size_t>(pt.u);
      double wgt = in.depth.ptr()[(cam * B + static_cast<std::size_t>(pt.bin)) * plane + p];
      if (use_mask) wgt *= static_cast<double>(in.mask.ptr()[cam * plane + p]);
      for (std::size_t c = 0; c < C; ++c)
        a[c] += wgt * static_cast<double>(in.features.ptr()[(cam * C + c) * plane + p]);
    }
  Tensor out({C, static_cast<std::size_t>(grid.ny), static_cast<std::size_t>(grid.nx)});
  for (std::size_t cell = 0; cell < cells; ++cell)
    if (!acc[cell].empty())
      for (std::size_t c = 0; c < C; ++c) out.ptr()[c * cells + cell] = static_cast<float>(acc[cell][c]);
  return out;
}

/// Per-channel totals of a [C, ny, nx] feature, summed in double.
inline std::vector<double> channel_totals(const Tensor& f) {
  const std::size_t C = f.dim(0), cells = f.dim(1) * f.dim(2);
  std::vector<double> out(C, 0.0);
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t i = 0; i < cells; ++i) out[c] += f.ptr()[c * cells + i];
  return out;
}

/// Per-channel sum over table records of weight * I, the direct conservation total.
template <TableKind Kind>
std::vector<double> record_totals(const ViewInputs& in, const PoolTable<Kind>& table, bool use_mask) {
  const std::size_t C = in.channels(), plane = in.height() * in.width(), B = in.n_bins();
  std::vector<double> out(C, 0.0);
  for (const auto& r : table.records()) {
    double w = in.depth.ptr()[r.cam * B * plane + r.depth_index];
    if (use_mask) w *= in.mask.ptr()[r.cam * plane + r.feat_index];
    for (std::size_t c = 0; c < C; ++c)
      out[c] += w * in.features.ptr()[(r.cam * C + c) * plane + r.feat_index];
  }
  return out;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("dualbev_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
