#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dualbev/tensor.hpp"

namespace dualbev {

/// One camera at feature resolution.
///
/// `K` is already divided by the feature stride, so projections land in
/// feature-pixel units. `T` maps ego coordinates (x forward, y left, z up)
/// into the camera frame (z forward, x right, y down).
template <typename Scalar>
struct BasicCameraRig {
  using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
  using Mat4 = Eigen::Matrix<Scalar, 4, 4>;

  Mat3 K = Mat3::Identity();
  Mat4 T = Mat4::Identity();
  int feat_w = 0;
  int feat_h = 0;
  int cam_id = 0;

  /// Throws InvalidCamera when K or T break the pinhole/rigid invariants.
  void validate() const;

  [[nodiscard]] Mat4 ego_from_camera() const {
    Mat4 inv = Mat4::Identity();
    inv.template topLeftCorner<3, 3>() = T.template topLeftCorner<3, 3>().transpose();
    inv.template topRightCorner<3, 1>() =
        -inv.template topLeftCorner<3, 3>() * T.template topRightCorner<3, 1>();
    return inv;
  }
};

using CameraRig = BasicCameraRig<double>;

template <typename Scalar>
struct Projection {
  Scalar u;
  Scalar v;
  Scalar d;  // camera-frame depth in meters
};

inline constexpr double kMinProjectionDepth = 1e-6;

/// Pinhole projection of an ego-frame point; nullopt when the point is at or
/// behind the image plane (camera z <= 1e-6 m).
template <typename Scalar>
std::optional<Projection<Scalar>> project_point(const Eigen::Matrix<Scalar, 3, 1>& p_ego,
                                                const BasicCameraRig<Scalar>& cam) {
  const Eigen::Matrix<Scalar, 3, 1> q =
      cam.T.template topLeftCorner<3, 3>() * p_ego + cam.T.template topRightCorner<3, 1>();
  if (q.z() <= Scalar(kMinProjectionDepth)) return std::nullopt;
  const Eigen::Matrix<Scalar, 3, 1> h = cam.K * q;
  return Projection<Scalar>{h.x() / q.z(), h.y() / q.z(), q.z()};
}

/// Inverse of project_point for a known depth.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> back_project(const Projection<Scalar>& p,
                                         const BasicCameraRig<Scalar>& cam) {
  const Eigen::Matrix<Scalar, 3, 1> pix(p.u * p.d, p.v * p.d, p.d);
  const Eigen::Matrix<Scalar, 3, 1> q = cam.K.partialPivLu().solve(pix);
  const auto inv = cam.ego_from_camera();
  return inv.template topLeftCorner<3, 3>() * q + inv.template topRightCorner<3, 1>();
}

extern template void BasicCameraRig<double>::validate() const;
extern template void BasicCameraRig<float>::validate() const;

/// Axis-aligned BEV grid. Cell (i, j) spans column i along x and row j along
/// y; its linear index is j * nx + i.
struct BevGridSpec {
  double x_min = -51.2;
  double x_max = 51.2;
  double y_min = -51.2;
  double y_max = 51.2;
  int nx = 128;
  int ny = 128;

  void validate() const;

  [[nodiscard]] double cell_width() const noexcept { return (x_max - x_min) / nx; }
  [[nodiscard]] double cell_height() const noexcept { return (y_max - y_min) / ny; }
  [[nodiscard]] std::size_t n_cells() const noexcept {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  }
  [[nodiscard]] Eigen::Vector2d cell_center(int i, int j) const noexcept {
    return {x_min + (i + 0.5) * cell_width(), y_min + (j + 0.5) * cell_height()};
  }
  /// Linear index of the cell containing (x, y) on half-open intervals.
  [[nodiscard]] std::optional<std::size_t> cell_of(double x, double y) const noexcept;

  bool operator==(const BevGridSpec&) const = default;
};

/// Cell centers as a [ny, nx, 2] tensor of (x, y).
Tensor bev_cell_centers(const BevGridSpec& spec);

struct HeightMode {
  enum class Kind { MultiRes, Uniform };
  Kind kind = Kind::MultiRes;
  int count = 0;

  static HeightMode multi_res() { return {Kind::MultiRes, 0}; }
  static HeightMode uniform(int n) { return {Kind::Uniform, n}; }
  bool operator==(const HeightMode&) const = default;
};

struct HeightSet {
  std::vector<double> z_values;
  HeightMode mode;

  [[nodiscard]] std::size_t size() const noexcept { return z_values.size(); }
};

inline constexpr double kHeightMin = -5.0;
inline constexpr double kHeightMax = 3.0;
inline constexpr double kHeightRoiMin = -2.0;
inline constexpr double kHeightRoiMax = 2.0;
inline constexpr double kHeightRoiStep = 0.5;
inline constexpr double kHeightOuterStep = 1.0;

/// MultiRes: 0.5 m spacing inside the [-2, 2] m region of interest, 1 m
/// outside it, over [-5, 3] m. Uniform(n): n points spanning [-5, 3].
HeightSet make_height_samples(HeightMode mode);

}  // namespace dualbev
