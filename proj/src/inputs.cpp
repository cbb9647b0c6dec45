#include "dualbev/inputs.hpp"

#include "dualbev/error.hpp"
#include "dualbev/sampling.hpp"

namespace dualbev {

void ViewInputs::validate(const DepthBinSpec* spec) const {
  if (features.rank() != 4 || depth.rank() != 4 || mask.rank() != 4)
    throw Error(Errc::ShapeMismatch, "view inputs must be rank-4 [N,C,H,W] tensors");
  const auto& f = features.shape();
  const auto& d = depth.shape();
  const auto& m = mask.shape();
  if (d[0] != f[0] || m[0] != f[0])
    throw Error(Errc::ShapeMismatch, "camera count differs across I, D, M");
  if (d[2] != f[2] || d[3] != f[3] || m[2] != f[2] || m[3] != f[3])
    throw Error(Errc::ShapeMismatch, "feature extents differ across I, D, M: " + shape_string(f) +
                                         " " + shape_string(d) + " " + shape_string(m));
  if (m[1] != 1) throw Error(Errc::ShapeMismatch, "instance mask must have one channel");
  if (spec && static_cast<int>(d[1]) != spec->n_bins())
    throw Error(Errc::ShapeMismatch, "depth map has " + std::to_string(d[1]) + " bins, spec has " +
                                         std::to_string(spec->n_bins()));
}

}  // namespace dualbev
