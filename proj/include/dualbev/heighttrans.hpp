#pragma once

#include <optional>
#include <span>

#include "dualbev/geometry.hpp"
#include "dualbev/inputs.hpp"
#include "dualbev/lookup_table.hpp"
#include "dualbev/sampling.hpp"

namespace dualbev {

/// How a projected BEV point reads the image-side tensors.
enum class SamplerMode {
  Interp,  // bilinear feature/mask sampling, trilinear depth sampling
  Round,   // nearest pixel and nearest depth bin, as stored in the lookup table
};

/// Nearest-neighbour discretization of one projection.
struct RoundedHit {
  std::uint32_t u = 0;
  std::uint32_t v = 0;
  std::uint32_t bin = 0;
};

/// Rounds u, v and the depth-bin coordinate half away from zero. Returns
/// nullopt when the pixel lies outside [0, W-1] x [0, H-1] or the bin outside
/// [0, C_D-1].
std::optional<RoundedHit> round_projection(const Projection<double>& p, int width, int height,
                                           const DepthBinSpec& dspec) noexcept;

/// Projects every (cell center, height, camera) point and keeps the in-view
/// rounded hits. Records are ordered by cell, then camera, then height.
HtLookupTable precompute_ht_table(std::span<const CameraRig> rigs, const BevGridSpec& grid,
                                  const HeightSet& heights, const DepthBinSpec& dspec);

/// Reference HeightTrans: projects on the fly and sums
/// D-sample * (M*I)-sample over heights and cameras per cell. Returns the
/// [C_I, ny, nx] feature before the BEV probability is applied.
Tensor ht_transform_naive(const ViewInputs& inputs, std::span<const CameraRig> rigs,
                          const BevGridSpec& grid, const HeightSet& heights,
                          const DepthBinSpec& dspec, SamplerMode mode);

/// Table-driven HeightTrans. Bitwise equal to ht_transform_naive(Round).
Tensor ht_transform_fast(const ViewInputs& inputs, const HtLookupTable& table, int threads = 1);

}  // namespace dualbev
