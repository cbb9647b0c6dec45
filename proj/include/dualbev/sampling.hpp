#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "dualbev/tensor.hpp"

namespace dualbev {

/// Depth discretization of the per-pixel categorical distribution.
/// Bin k covers [d_min + k*step, d_min + (k+1)*step).
struct DepthBinSpec {
  double d_min = 2.0;
  double d_max = 58.0;
  double step = 0.5;

  void validate() const;
  [[nodiscard]] int n_bins() const noexcept {
    return static_cast<int>(std::lround((d_max - d_min) / step));
  }
  [[nodiscard]] double bin_center(int k) const noexcept { return d_min + (k + 0.5) * step; }

  bool operator==(const DepthBinSpec&) const = default;
};

/// Continuous bin coordinate with bin centers at integers.
inline double depth_to_coord(double d, const DepthBinSpec& spec) noexcept {
  return (d - spec.d_min) / spec.step - 0.5;
}

/// Up to four bilinear corner taps on an H x W plane, pixel (y, x) sitting
/// at (u = x, v = y). Corners outside the plane are dropped (zero padding).
struct BilinearTaps {
  std::array<std::size_t, 4> index{};
  std::array<double, 4> weight{};
  int count = 0;

  BilinearTaps(double u, double v, std::size_t height, std::size_t width) noexcept;
};

/// Bilinear sample of every channel of a [C, H, W] tensor, zero padded.
std::vector<float> bilinear_sample_2d(const Tensor& feat, double u, double v);

/// Trilinear sample of a [C_D, H, W] depth map at image position (u, v) and
/// metric depth d: bilinear in the image plane, linear across depth bins,
/// zero outside the bin range.
double trilinear_sample_3d(const Tensor& depth, double u, double v, double d,
                           const DepthBinSpec& spec);

/// Same as above for one camera inside a stacked [N, C_D, H, W] map.
double trilinear_sample_3d(const float* depth_planes, std::size_t n_bins, std::size_t height,
                           std::size_t width, double u, double v, double d,
                           const DepthBinSpec& spec) noexcept;

/// Number of [H, W] positions whose depth column does not sum to 1 within
/// `tol`. Accepts [C_D, H, W] or stacked [N, C_D, H, W].
std::size_t count_unnormalized_columns(const Tensor& depth, double tol = 1e-4);

/// Throws InvalidMask unless every value lies in [0, 1].
void check_mask_range(const Tensor& mask);

}  // namespace dualbev
