#include "dualbev/nnops.hpp"

#include <algorithm>
#include <cmath>

#include "dualbev/error.hpp"

namespace dualbev {
namespace {

void require_chw(const Tensor& x, const char* op) {
  if (x.rank() != 3) throw Error(Errc::ShapeMismatch, std::string(op) + " expects [C,H,W], got " +
                                                          shape_string(x.shape()));
}

}  // namespace

void Conv2dWeights::validate() const {
  if (kernel.rank() != 4) throw Error(Errc::ShapeMismatch, "conv kernel must be [C_out,C_in,kh,kw]");
  if (kernel.dim(2) % 2 == 0 || kernel.dim(3) % 2 == 0)
    throw Error(Errc::ShapeMismatch, "conv kernel extents must be odd");
  if (bias.rank() != 1 || bias.dim(0) != kernel.dim(0))
    throw Error(Errc::ShapeMismatch, "conv bias must be [C_out]");
}

Tensor conv2d(const Tensor& x, const Conv2dWeights& w) {
  require_chw(x, "conv2d");
  w.validate();
  const std::size_t cin = x.dim(0), h = x.dim(1), wd = x.dim(2);
  if (w.in_channels() != cin)
    throw Error(Errc::ShapeMismatch, "conv2d: input has " + std::to_string(cin) +
                                         " channels, kernel expects " + std::to_string(w.in_channels()));
  const std::size_t cout = w.out_channels(), kh = w.kernel_h(), kw = w.kernel_w();
  const auto ph = static_cast<std::ptrdiff_t>(kh / 2), pw = static_cast<std::ptrdiff_t>(kw / 2);
  const auto H = static_cast<std::ptrdiff_t>(h), W = static_cast<std::ptrdiff_t>(wd);

  Tensor out({cout, h, wd});
  for (std::size_t co = 0; co < cout; ++co) {
    float* o = out.ptr() + co * h * wd;
    std::fill(o, o + h * wd, w.bias[co]);
    for (std::size_t ci = 0; ci < cin; ++ci) {
      const float* in = x.ptr() + ci * h * wd;
      const float* k = w.kernel.ptr() + ((co * cin + ci) * kh) * kw;
      for (std::ptrdiff_t ky = 0; ky < static_cast<std::ptrdiff_t>(kh); ++ky)
        for (std::ptrdiff_t kx = 0; kx < static_cast<std::ptrdiff_t>(kw); ++kx) {
          const float kv = k[ky * static_cast<std::ptrdiff_t>(kw) + kx];
          if (kv == 0.0f) continue;
          const std::ptrdiff_t dy = ky - ph, dx = kx - pw;
          const std::ptrdiff_t y0 = std::max<std::ptrdiff_t>(0, -dy), y1 = std::min(H, H - dy);
          const std::ptrdiff_t x0 = std::max<std::ptrdiff_t>(0, -dx), x1 = std::min(W, W - dx);
          for (std::ptrdiff_t y = y0; y < y1; ++y) {
            float* orow = o + y * W;
            const float* irow = in + (y + dy) * W + dx;
            for (std::ptrdiff_t xx = x0; xx < x1; ++xx) orow[xx] += kv * irow[xx];
          }
        }
    }
  }
  return out;
}

Tensor channel_stats(const Tensor& x) {
  require_chw(x, "channel_stats");
  const std::size_t c = x.dim(0), plane = x.dim(1) * x.dim(2);
  Tensor out({2, x.dim(1), x.dim(2)});
  for (std::size_t p = 0; p < plane; ++p) {
    double sum = 0.0;
    float mx = x[p];
    for (std::size_t k = 0; k < c; ++k) {
      const float v = x[k * plane + p];
      sum += v;
      mx = std::max(mx, v);
    }
    out[p] = static_cast<float>(sum / static_cast<double>(c));
    out[plane + p] = mx;
  }
  return out;
}

Tensor global_avg_pool(const Tensor& x) {
  require_chw(x, "global_avg_pool");
  const std::size_t c = x.dim(0), plane = x.dim(1) * x.dim(2);
  Tensor out({c, 1, 1});
  for (std::size_t k = 0; k < c; ++k) {
    double sum = 0.0;
    for (std::size_t p = 0; p < plane; ++p) sum += x[k * plane + p];
    out[k] = static_cast<float>(sum / static_cast<double>(plane));
  }
  return out;
}

float sigmoid(float x) noexcept {
  const double v = x;
  if (v >= 0.0) return static_cast<float>(1.0 / (1.0 + std::exp(-v)));
  const double e = std::exp(v);
  return static_cast<float>(e / (1.0 + e));
}

Tensor sigmoid(const Tensor& x) {
  Tensor out = x;
  out.array() = x.array().unaryExpr([](float v) { return sigmoid(v); });
  return out;
}

Tensor relu(const Tensor& x) {
  Tensor out = x;
  out.array() = x.array().max(0.0f);
  return out;
}

}  // namespace dualbev
