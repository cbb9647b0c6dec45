#include "dualbev/problss.hpp"

#include "dualbev/error.hpp"

namespace dualbev {

std::vector<FrustumPoint> lift_frustum(const CameraRig& cam, const DepthBinSpec& dspec) {
  cam.validate();
  dspec.validate();
  const Eigen::Matrix3d k_inv = cam.K.inverse();
  const Eigen::Matrix4d ego_from_cam = cam.ego_from_camera();
  const Eigen::Matrix3d rot = ego_from_cam.topLeftCorner<3, 3>();
  const Eigen::Vector3d trans = ego_from_cam.topRightCorner<3, 1>();

  std::vector<FrustumPoint> points;
  points.reserve(static_cast<std::size_t>(cam.feat_w) * cam.feat_h * dspec.n_bins());
  for (int k = 0; k < dspec.n_bins(); ++k) {
    const double d = dspec.bin_center(k);
    for (int v = 0; v < cam.feat_h; ++v)
      for (int u = 0; u < cam.feat_w; ++u) {
        const Eigen::Vector3d q = k_inv * Eigen::Vector3d(u * d, v * d, d);
        points.push_back({u, v, k, rot * q + trans});
      }
  }
  return points;
}

LssPoolTable precompute_lss_table(std::span<const CameraRig> rigs, const BevGridSpec& grid,
                                  const DepthBinSpec& dspec) {
  if (rigs.empty()) throw Error(Errc::NoCameras, "no camera rigs given");
  grid.validate();
  dspec.validate();
  const int w = rigs.front().feat_w, h = rigs.front().feat_h;
  for (const auto& r : rigs)
    if (r.feat_w != w || r.feat_h != h)
      throw Error(Errc::ShapeMismatch, "all cameras must share one feature geometry");
  const auto plane = static_cast<std::uint32_t>(w * h);
  TableGeometry geom{static_cast<std::uint32_t>(rigs.size()), static_cast<std::uint32_t>(h),
                     static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(dspec.n_bins()),
                     static_cast<std::uint32_t>(grid.ny), static_cast<std::uint32_t>(grid.nx)};

  // Points arrive in (camera, depth index) order; a stable counting sort by
  // cell keeps that order inside each cell.
  std::vector<PoolRecord> unsorted;
  for (std::size_t cam = 0; cam < rigs.size(); ++cam)
    for (const auto& pt : lift_frustum(rigs[cam], dspec)) {
      const auto cell = grid.cell_of(pt.ego.x(), pt.ego.y());
      if (!cell) continue;
      const auto feat = static_cast<std::uint32_t>(pt.v * w + pt.u);
      unsorted.push_back({static_cast<std::uint32_t>(*cell), static_cast<std::uint32_t>(cam), feat,
                          static_cast<std::uint32_t>(pt.bin) * plane + feat});
    }
  std::vector<std::size_t> start(grid.n_cells() + 1, 0);
  for (const auto& r : unsorted) ++start[r.bev_cell + 1];
  for (std::size_t c = 0; c < grid.n_cells(); ++c) start[c + 1] += start[c];
  std::vector<PoolRecord> records(unsorted.size());
  for (const auto& r : unsorted) records[start[r.bev_cell]++] = r;
  return LssPoolTable(geom, std::move(records));
}

Tensor lss_pool(const ViewInputs& inputs, const LssPoolTable& table, WeightMode mode, int threads) {
  return pool_scatter(inputs, table,
                      mode == WeightMode::DepthMask ? PoolWeight::DepthMask : PoolWeight::DepthOnly,
                      threads);
}

}  // namespace dualbev
