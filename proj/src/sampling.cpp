#include "dualbev/sampling.hpp"

#include "dualbev/error.hpp"

namespace dualbev {

void DepthBinSpec::validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) throw Error(Errc::InvalidRange, "depth step must be > 0");
  if (!(d_max > d_min)) throw Error(Errc::InvalidRange, "depth range is empty");
  const double bins = (d_max - d_min) / step;
  if (std::abs(bins - std::round(bins)) > 1e-9 * std::max(1.0, bins))
    throw Error(Errc::InvalidRange, "depth range is not a whole number of steps");
  if (n_bins() < 1) throw Error(Errc::InvalidRange, "depth spec has no bins");
}

BilinearTaps::BilinearTaps(double u, double v, std::size_t height, std::size_t width) noexcept {
  const double u0 = std::floor(u);
  const double v0 = std::floor(v);
  const double fu = u - u0;
  const double fv = v - v0;
  const double w = static_cast<double>(width);
  const double h = static_cast<double>(height);
  const double wu[2] = {1.0 - fu, fu};
  const double wv[2] = {1.0 - fv, fv};
  for (int dy = 0; dy < 2; ++dy) {
    const double y = v0 + dy;
    if (y < 0.0 || y > h - 1.0) continue;
    for (int dx = 0; dx < 2; ++dx) {
      const double x = u0 + dx;
      if (x < 0.0 || x > w - 1.0) continue;
      const double wt = wv[dy] * wu[dx];
      if (wt == 0.0) continue;
      index[count] = static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x);
      weight[count] = wt;
      ++count;
    }
  }
}

std::vector<float> bilinear_sample_2d(const Tensor& feat, double u, double v) {
  if (feat.rank() != 3) throw Error(Errc::ShapeMismatch, "bilinear_sample_2d expects [C,H,W]");
  const std::size_t c_dim = feat.dim(0), h = feat.dim(1), w = feat.dim(2);
  std::vector<float> out(c_dim, 0.0f);
  const BilinearTaps taps(u, v, h, w);
  for (std::size_t c = 0; c < c_dim; ++c) {
    const float* plane = feat.ptr() + c * h * w;
    double acc = 0.0;
    for (int t = 0; t < taps.count; ++t) acc += taps.weight[t] * plane[taps.index[t]];
    out[c] = static_cast<float>(acc);
  }
  return out;
}

double trilinear_sample_3d(const float* depth_planes, std::size_t n_bins, std::size_t height,
                           std::size_t width, double u, double v, double d,
                           const DepthBinSpec& spec) noexcept {
  const double kc = depth_to_coord(d, spec);
  const double k0 = std::floor(kc);
  const double fk = kc - k0;
  const BilinearTaps taps(u, v, height, width);
  if (taps.count == 0) return 0.0;
  double acc = 0.0;
  const double wk[2] = {1.0 - fk, fk};
  for (int dk = 0; dk < 2; ++dk) {
    const double k = k0 + dk;
    if (k < 0.0 || k > static_cast<double>(n_bins) - 1.0 || wk[dk] == 0.0) continue;
    const float* plane = depth_planes + static_cast<std::size_t>(k) * height * width;
    double s = 0.0;
    for (int t = 0; t < taps.count; ++t) s += taps.weight[t] * plane[taps.index[t]];
    acc += wk[dk] * s;
  }
  return acc;
}

double trilinear_sample_3d(const Tensor& depth, double u, double v, double d,
                           const DepthBinSpec& spec) {
  if (depth.rank() != 3) throw Error(Errc::ShapeMismatch, "trilinear_sample_3d expects [C_D,H,W]");
  if (static_cast<int>(depth.dim(0)) != spec.n_bins())
    throw Error(Errc::ShapeMismatch, "depth map has " + std::to_string(depth.dim(0)) +
                                         " bins, spec has " + std::to_string(spec.n_bins()));
  return trilinear_sample_3d(depth.ptr(), depth.dim(0), depth.dim(1), depth.dim(2), u, v, d, spec);
}

std::size_t count_unnormalized_columns(const Tensor& depth, double tol) {
  if (depth.rank() != 3 && depth.rank() != 4)
    throw Error(Errc::ShapeMismatch, "depth map must be [C_D,H,W] or [N,C_D,H,W]");
  const std::size_t n = depth.rank() == 4 ? depth.dim(0) : 1;
  const std::size_t off = depth.rank() == 4 ? 1 : 0;
  const std::size_t bins = depth.dim(off), hw = depth.dim(off + 1) * depth.dim(off + 2);
  std::size_t bad = 0;
  for (std::size_t cam = 0; cam < n; ++cam) {
    const float* base = depth.ptr() + cam * bins * hw;
    for (std::size_t p = 0; p < hw; ++p) {
      double s = 0.0;
      for (std::size_t k = 0; k < bins; ++k) s += base[k * hw + p];
      if (std::abs(s - 1.0) > tol) ++bad;
    }
  }
  return bad;
}

void check_mask_range(const Tensor& mask) {
  for (float m : mask.data())
    if (!(m >= 0.0f && m <= 1.0f)) throw Error(Errc::InvalidMask, "instance mask value outside [0, 1]");
}

}  // namespace dualbev
