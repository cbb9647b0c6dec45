#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace dualbev {

using Shape = std::vector<std::size_t>;

inline constexpr std::size_t kMaxRank = 8;

std::size_t shape_volume(const Shape& shape) noexcept;
std::string shape_string(const Shape& shape);

/// Dense row-major float32 array (last axis fastest).
///
/// Construction validates the shape (rank 1..8, positive extents) and that
/// every value is finite. Element access is unchecked; callers that index by
/// externally supplied data validate beforehand.
class Tensor {
 public:
  using ArrayMap = Eigen::Map<Eigen::ArrayXf>;
  using ConstArrayMap = Eigen::Map<const Eigen::ArrayXf>;

  Tensor() = default;
  /// Zero-filled tensor.
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<float> data);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor full(Shape shape, float value);

  [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
  [[nodiscard]] std::size_t rank() const noexcept { return shape_.size(); }
  [[nodiscard]] std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  [[nodiscard]] std::span<const float> data() const noexcept { return data_; }
  [[nodiscard]] std::span<float> data() noexcept { return data_; }
  [[nodiscard]] const float* ptr() const noexcept { return data_.data(); }
  [[nodiscard]] float* ptr() noexcept { return data_.data(); }

  [[nodiscard]] ConstArrayMap array() const noexcept {
    return ConstArrayMap(data_.data(), static_cast<Eigen::Index>(data_.size()));
  }
  [[nodiscard]] ArrayMap array() noexcept {
    return ArrayMap(data_.data(), static_cast<Eigen::Index>(data_.size()));
  }

  float operator[](std::size_t i) const noexcept { return data_[i]; }
  float& operator[](std::size_t i) noexcept { return data_[i]; }

  // Rank-3 accessor, the common [C,H,W] case.
  float operator()(std::size_t c, std::size_t y, std::size_t x) const noexcept {
    return data_[(c * shape_[1] + y) * shape_[2] + x];
  }
  float& operator()(std::size_t c, std::size_t y, std::size_t x) noexcept {
    return data_[(c * shape_[1] + y) * shape_[2] + x];
  }

  /// Same data, new shape of equal volume.
  [[nodiscard]] Tensor reshaped(Shape shape) const;

  /// Sub-tensor along the leading axis: index `i` of a [N, ...] tensor.
  [[nodiscard]] Tensor slice(std::size_t i) const;

  /// Throws NonFiniteValue if any element is NaN or infinite.
  void check_finite() const;

  /// Bitwise comparison of shape and payload (distinguishes +0 and -0).
  [[nodiscard]] bool bitwise_equal(const Tensor& other) const noexcept;

 private:
  Shape shape_;
  std::vector<float> data_;
};

/// Stacks equally-shaped tensors along a new leading axis.
Tensor stack(std::span<const Tensor> parts);

double max_abs_diff(const Tensor& a, const Tensor& b);
/// ||a - b||_2 / ||b||_2, or ||a||_2 when b is all zeros.
double relative_l2(const Tensor& a, const Tensor& b);

}  // namespace dualbev
