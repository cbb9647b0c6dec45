#pragma once

#include "dualbev/tensor.hpp"

namespace dualbev {

/// Stride-1 "same" convolution weights: kernel [C_out, C_in, kh, kw] with odd
/// kh, kw and bias [C_out].
struct Conv2dWeights {
  Tensor kernel;
  Tensor bias;

  void validate() const;
  [[nodiscard]] std::size_t out_channels() const { return kernel.dim(0); }
  [[nodiscard]] std::size_t in_channels() const { return kernel.dim(1); }
  [[nodiscard]] std::size_t kernel_h() const { return kernel.dim(2); }
  [[nodiscard]] std::size_t kernel_w() const { return kernel.dim(3); }
};

/// Cross-correlation of x [C_in, H, W] with zero padding (kh/2, kw/2);
/// output [C_out, H, W].
Tensor conv2d(const Tensor& x, const Conv2dWeights& w);

/// Per-position mean (plane 0) and max (plane 1) across channels: [2, H, W].
Tensor channel_stats(const Tensor& x);

/// Mean over H x W per channel: [C, 1, 1].
Tensor global_avg_pool(const Tensor& x);

/// Logistic function, computed without overflow for large |x|.
Tensor sigmoid(const Tensor& x);
Tensor relu(const Tensor& x);

float sigmoid(float x) noexcept;

}  // namespace dualbev
