#include "dualbev/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "dualbev/error.hpp"

namespace dualbev {

template <typename Scalar>
void BasicCameraRig<Scalar>::validate() const {
  if (feat_w < 1 || feat_h < 1) throw Error(Errc::InvalidCamera, "feature extents must be >= 1");
  if (!(K(0, 0) > Scalar(0)) || !(K(1, 1) > Scalar(0)))
    throw Error(Errc::InvalidCamera, "focal lengths must be positive");
  if (K(2, 2) != Scalar(1) || K(2, 0) != Scalar(0) || K(2, 1) != Scalar(0))
    throw Error(Errc::InvalidCamera, "intrinsics last row must be [0, 0, 1]");
  if (!K.allFinite() || !T.allFinite()) throw Error(Errc::InvalidCamera, "non-finite calibration");
  if (T(3, 0) != Scalar(0) || T(3, 1) != Scalar(0) || T(3, 2) != Scalar(0) || T(3, 3) != Scalar(1))
    throw Error(Errc::InvalidCamera, "extrinsics last row must be [0, 0, 0, 1]");
  const Eigen::Matrix<Scalar, 3, 3> R = T.template topLeftCorner<3, 3>();
  const Scalar err = (R * R.transpose() - Eigen::Matrix<Scalar, 3, 3>::Identity()).cwiseAbs().maxCoeff();
  if (err > Scalar(1e-5)) throw Error(Errc::InvalidCamera, "extrinsic rotation is not orthonormal");
  if (R.determinant() < Scalar(0)) throw Error(Errc::InvalidCamera, "extrinsic rotation is a reflection");
}

template void BasicCameraRig<double>::validate() const;
template void BasicCameraRig<float>::validate() const;

void BevGridSpec::validate() const {
  if (nx < 1 || ny < 1) throw Error(Errc::InvalidGrid, "nx, ny must be >= 1");
  if (!(x_max > x_min) || !(y_max > y_min)) throw Error(Errc::InvalidGrid, "empty grid extent");
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !std::isfinite(y_min) || !std::isfinite(y_max))
    throw Error(Errc::InvalidGrid, "non-finite grid bounds");
}

std::optional<std::size_t> BevGridSpec::cell_of(double x, double y) const noexcept {
  if (!(x >= x_min && x < x_max && y >= y_min && y < y_max)) return std::nullopt;
  // Rounding in the division can push a point just below max into cell n.
  const int i = std::min(static_cast<int>(std::floor((x - x_min) / cell_width())), nx - 1);
  const int j = std::min(static_cast<int>(std::floor((y - y_min) / cell_height())), ny - 1);
  return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i);
}

Tensor bev_cell_centers(const BevGridSpec& spec) {
  spec.validate();
  Tensor out({static_cast<std::size_t>(spec.ny), static_cast<std::size_t>(spec.nx), 2});
  float* p = out.ptr();
  for (int j = 0; j < spec.ny; ++j)
    for (int i = 0; i < spec.nx; ++i) {
      const Eigen::Vector2d c = spec.cell_center(i, j);
      *p++ = static_cast<float>(c.x());
      *p++ = static_cast<float>(c.y());
    }
  return out;
}

HeightSet make_height_samples(HeightMode mode) {
  HeightSet set{{}, mode};
  if (mode.kind == HeightMode::Kind::Uniform) {
    if (mode.count < 2) throw Error(Errc::InvalidCount, "uniform height sampling needs n >= 2");
    const double span = kHeightMax - kHeightMin;
    for (int k = 0; k < mode.count; ++k)
      set.z_values.push_back(k + 1 == mode.count ? kHeightMax
                                                 : kHeightMin + span * k / (mode.count - 1));
    return set;
  }
  // Integer step counts keep every value exactly representable.
  const int below = static_cast<int>(std::lround((kHeightRoiMin - kHeightMin) / kHeightOuterStep));
  const int inside = static_cast<int>(std::lround((kHeightRoiMax - kHeightRoiMin) / kHeightRoiStep));
  const int above = static_cast<int>(std::lround((kHeightMax - kHeightRoiMax) / kHeightOuterStep));
  for (int k = 0; k < below; ++k) set.z_values.push_back(kHeightMin + k * kHeightOuterStep);
  for (int k = 0; k < inside; ++k) set.z_values.push_back(kHeightRoiMin + k * kHeightRoiStep);
  for (int k = 0; k <= above; ++k) set.z_values.push_back(kHeightRoiMax + k * kHeightOuterStep);
  return set;
}

}  // namespace dualbev
