#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "dualbev/geometry.hpp"
#include "dualbev/inputs.hpp"
#include "dualbev/lookup_table.hpp"
#include "dualbev/sampling.hpp"

namespace dualbev {

/// A lifted (pixel, depth bin) pair and its ego-frame position.
struct FrustumPoint {
  int u = 0;
  int v = 0;
  int bin = 0;
  Eigen::Vector3d ego;
};

/// Lifts every pixel of one camera at every depth-bin center, ordered by
/// bin, then row, then column (i.e. by depth index). W * H * C_D points.
std::vector<FrustumPoint> lift_frustum(const CameraRig& cam, const DepthBinSpec& dspec);

/// Assigns each lifted point to the BEV cell containing its (x, y) and
/// keeps the in-grid ones, ordered by cell, then camera, then depth index.
LssPoolTable precompute_lss_table(std::span<const CameraRig> rigs, const BevGridSpec& grid,
                                  const DepthBinSpec& dspec);

/// BEVDet-style weighting uses D alone; the mask-aware variant uses D * M.
enum class WeightMode { DepthOnly, DepthMask };

/// Depth (and mask) weighted sum pooling of I into BEV cells, [C_I, ny, nx],
/// before the BEV probability is applied. No per-cell normalization.
Tensor lss_pool(const ViewInputs& inputs, const LssPoolTable& table, WeightMode mode,
                int threads = 1);

}  // namespace dualbev
