#include <doctest.h>

#include "dualbev/error.hpp"
#include "dualbev/rng.hpp"
#include "dualbev/sampling.hpp"

using namespace dualbev;

namespace {

Tensor one_hot_depth(std::size_t bins, std::size_t h, std::size_t w, std::size_t k) {
  Tensor d({bins, h, w});
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) d(k, y, x) = 1.0f;
  return d;
}

}  // namespace

TEST_CASE("bilinear sampling examples") {
  const Tensor c = Tensor::full({3, 4, 5}, 2.5f);
  for (double u : {0.0, 1.3, 3.99, 4.0})
    for (double v : {0.0, 0.7, 2.5, 3.0})
      for (float s : bilinear_sample_2d(c, u, v)) CHECK(s == doctest::Approx(2.5f));

  const Tensor ab({1, 1, 2}, {3.0f, 7.0f});
  CHECK(bilinear_sample_2d(ab, 0.5, 0.0)[0] == doctest::Approx(5.0f));

  for (float s : bilinear_sample_2d(c, -10.0, 0.0)) CHECK(s == 0.0f);
  // Half a pixel past the border keeps half the weight under zero padding.
  CHECK(bilinear_sample_2d(c, -0.5, 0.0)[0] == doctest::Approx(1.25f));
}

TEST_CASE("bilinear sampling at integer coordinates is direct indexing") {
  Rng rng(5);
  const Tensor f = rng_uniform(rng, {4, 6, 7}, -3.0f, 3.0f);
  for (std::size_t y = 0; y < 6; ++y)
    for (std::size_t x = 0; x < 7; ++x) {
      const auto s = bilinear_sample_2d(f, static_cast<double>(x), static_cast<double>(y));
      for (std::size_t c = 0; c < 4; ++c) CHECK(s[c] == f(c, y, x));
    }
}

TEST_CASE("depth_to_coord bin-center convention") {
  DepthBinSpec spec;
  CHECK(spec.n_bins() == 112);
  CHECK(depth_to_coord(2.25, spec) == 0.0);
  CHECK(depth_to_coord(2.0, spec) == -0.5);
  CHECK(depth_to_coord(4.25, spec) == 4.0);
  CHECK(spec.bin_center(15) == 9.75);
  DepthBinSpec bad{5.0, 2.0, 0.5};
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("trilinear sampling examples") {
  DepthBinSpec spec;
  const std::size_t k = 30;
  const Tensor d = one_hot_depth(112, 4, 6, k);
  const double dc = spec.bin_center(static_cast<int>(k));
  CHECK(trilinear_sample_3d(d, 2.0, 1.0, dc, spec) == 1.0);
  CHECK(trilinear_sample_3d(d, 2.0, 1.0, spec.bin_center(k + 2), spec) == 0.0);
  CHECK(trilinear_sample_3d(d, 2.0, 1.0, spec.bin_center(k - 2), spec) == 0.0);
  // Halfway to the next bin center splits the mass.
  CHECK(trilinear_sample_3d(d, 2.0, 1.0, dc + 0.25, spec) == doctest::Approx(0.5));

  const Tensor uni = Tensor::full({112, 4, 6}, 1.0f / 112);
  for (double dd : {2.25, 10.0, 33.3, 57.75})
    CHECK(trilinear_sample_3d(uni, 1.5, 2.25, dd, spec) == doctest::Approx(1.0 / 112));
  CHECK(trilinear_sample_3d(uni, 1.0, 1.0, 80.0, spec) == 0.0);
  CHECK(trilinear_sample_3d(uni, 1.0, 1.0, 1.0, spec) == 0.0);
}

TEST_CASE("samplers are linear in the sampled map") {
  Rng rng(12);
  DepthBinSpec spec{2.0, 12.0, 0.5};
  for (int n = 0; n < 50; ++n) {
    const Tensor a = rng_uniform(rng, {20, 5, 6}, -1.0f, 1.0f);
    const Tensor b = rng_uniform(rng, {20, 5, 6}, -1.0f, 1.0f);
    const float alpha = rng.uniform(-2.0f, 2.0f), beta = rng.uniform(-2.0f, 2.0f);
    Tensor mix({20, 5, 6});
    mix.array() = alpha * a.array() + beta * b.array();
    const double u = rng.uniform(-1.0f, 6.0f), v = rng.uniform(-1.0f, 5.0f);
    const double d = rng.uniform(1.5f, 12.5f);

    const auto sa = bilinear_sample_2d(a, u, v), sb = bilinear_sample_2d(b, u, v);
    const auto sm = bilinear_sample_2d(mix, u, v);
    for (std::size_t c = 0; c < 20; ++c) CHECK(std::abs(sm[c] - (alpha * sa[c] + beta * sb[c])) <= 1e-5);

    const double ta = trilinear_sample_3d(a, u, v, d, spec), tb = trilinear_sample_3d(b, u, v, d, spec);
    CHECK(std::abs(trilinear_sample_3d(mix, u, v, d, spec) - (alpha * ta + beta * tb)) <= 1e-5);
  }
}

TEST_CASE("trilinear sampling is monotone under domination") {
  Rng rng(13);
  DepthBinSpec spec{2.0, 12.0, 0.5};
  for (int n = 0; n < 100; ++n) {
    const Tensor d2 = rng_uniform(rng, {20, 5, 6}, 0.0f, 1.0f);
    Tensor d1 = d2;
    d1.array() += rng_uniform(rng, {20, 5, 6}, 0.0f, 0.5f).array();
    const double u = rng.uniform(-1.0f, 6.0f), v = rng.uniform(-1.0f, 5.0f), d = rng.uniform(1.5f, 12.5f);
    CHECK(trilinear_sample_3d(d1, u, v, d, spec) >= trilinear_sample_3d(d2, u, v, d, spec));
  }
}

TEST_CASE("depth normalization and mask range checks") {
  Tensor d = Tensor::full({4, 2, 2}, 0.25f);
  CHECK(count_unnormalized_columns(d) == 0);
  d(0, 1, 1) = 0.5f;
  CHECK(count_unnormalized_columns(d) == 1);
  CHECK_NOTHROW(check_mask_range(Tensor::full({1, 2, 2}, 1.0f)));
  try {
    check_mask_range(Tensor::full({1, 2, 2}, 1.5f));
    FAIL("expected InvalidMask");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InvalidMask);
  }
}
