#pragma once

#include <cstddef>

#include "dualbev/tensor.hpp"

namespace dualbev {

struct DepthBinSpec;

/// Per-camera network outputs stacked along a leading camera axis:
/// features I [N, C_I, H, W], depth D [N, C_D, H, W], mask M [N, 1, H, W].
struct ViewInputs {
  Tensor features;
  Tensor depth;
  Tensor mask;

  [[nodiscard]] std::size_t n_cams() const { return features.dim(0); }
  [[nodiscard]] std::size_t channels() const { return features.dim(1); }
  [[nodiscard]] std::size_t height() const { return features.dim(2); }
  [[nodiscard]] std::size_t width() const { return features.dim(3); }
  [[nodiscard]] std::size_t n_bins() const { return depth.dim(1); }

  /// Throws ShapeMismatch when the three tensors disagree on camera count
  /// or feature extents, or when the bin count differs from `spec`.
  void validate(const DepthBinSpec* spec = nullptr) const;
};

}  // namespace dualbev
