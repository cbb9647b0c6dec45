#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "dualbev/dff.hpp"
#include "dualbev/error.hpp"
#include "fixtures.hpp"

using namespace dualbev;

namespace {

Tensor random_bev(std::uint64_t seed, std::size_t c, std::size_t ny, std::size_t nx, float lo = -1.0f) {
  Rng rng(seed);
  return rng_uniform(rng, {c, ny, nx}, lo, 1.0f);
}

void saturate_caf(WeightBundle& w) {
  for (const char* name : {"caf.local.fc2", "caf.global.fc2"}) {
    auto& conv = w.at(name);
    conv.kernel = Tensor(conv.kernel.shape());
    conv.bias = Tensor::full(conv.bias.shape(), 100.0f);
  }
}

}  // namespace

TEST_CASE("weight specs follow the configured channel counts") {
  const auto specs = dff_weight_specs(DffConfig::for_channels(64));
  CHECK(specs.size() == 12);
  const auto w = seeded_bundle(specs, 1);
  CHECK(w.at("caf.reduce").kernel.shape() == Shape{64, 128, 1, 1});
  CHECK(w.at("caf.local.fc1").kernel.shape() == Shape{16, 64, 1, 1});
  CHECK(w.at("prob.local.reduce").kernel.shape() == Shape{16, 64, 3, 3});
  CHECK(w.at("prob.local.gate.fc1").kernel.shape() == Shape{4, 16, 1, 1});
  CHECK(w.at("prob.global.conv").kernel.shape() == Shape{1, 2, 7, 7});
  const float bound = 1.0f / std::sqrt(128.0f);
  CHECK(w.at("caf.reduce").kernel.array().abs().maxCoeff() <= bound);
  CHECK_THROWS_AS(static_cast<void>(w.at("nope")), Error);
  CafConfig bad{10, 4};
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("seeded weights are reproducible and survive a save/load round trip") {
  const auto specs = dff_weight_specs(DffConfig::for_channels(8));
  const auto a = seeded_bundle(specs, 11), b = seeded_bundle(specs, 11), c = seeded_bundle(specs, 12);
  CHECK(a.at("caf.reduce").kernel.bitwise_equal(b.at("caf.reduce").kernel));
  CHECK_FALSE(a.at("caf.reduce").kernel.bitwise_equal(c.at("caf.reduce").kernel));
  const auto dir = fixtures::scratch_dir("weights");
  save_bundle(a, dir);
  const auto back = load_bundle(dir, specs);
  for (const auto& [name, conv] : a.convs()) {
    CHECK(back.at(name).kernel.bitwise_equal(conv.kernel));
    CHECK(back.at(name).bias.bitwise_equal(conv.bias));
  }
  const auto wrong = dff_weight_specs(DffConfig::for_channels(16));
  CHECK_THROWS_AS(load_bundle(dir, wrong), Error);
}

TEST_CASE("equal operands pass through the fusion unchanged") {
  const auto w = seeded_bundle(caf_weight_specs({8, 4}), 2);
  const Tensor x = random_bev(1, 8, 10, 12);
  CHECK(caf_fuse(x, x, w, {8, 4}).fused.bitwise_equal(x));
}

TEST_CASE("forcing A to one reproduces the LSS operand exactly") {
  auto w = seeded_bundle(caf_weight_specs({8, 4}), 3);
  const Tensor l = random_bev(4, 8, 10, 12), h = random_bev(5, 8, 10, 12);
  saturate_caf(w);
  const auto out = caf_fuse(l, h, w, {8, 4});
  CHECK(out.affinity.array().minCoeff() == 1.0f);
  CHECK(out.fused.bitwise_equal(l));
  CHECK(caf_fuse(l, h, seeded_bundle(caf_weight_specs({8, 4}), 3), {8, 4}, 1.0f).fused.bitwise_equal(l));
  CHECK(caf_fuse(l, h, w, {8, 4}, 0.0f).fused.bitwise_equal(h));
}

TEST_CASE("fused features stay inside the operand interval") {
  const auto w = seeded_bundle(caf_weight_specs({16, 4}), 3);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Tensor l = random_bev(10 + s, 16, 9, 9), h = random_bev(20 + s, 16, 9, 9);
    const auto out = caf_fuse(l, h, w, {16, 4});
    for (std::size_t i = 0; i < l.size(); ++i) {
      CHECK(out.fused[i] >= std::min(l[i], h[i]));
      CHECK(out.fused[i] <= std::max(l[i], h[i]));
      CHECK(out.affinity[i] >= 0.0f);
      CHECK(out.affinity[i] <= 1.0f);
    }
  }
}

TEST_CASE("swapping operands under a constant one-half affinity changes nothing") {
  const auto w = zero_bundle(caf_weight_specs({8, 4}));
  const Tensor l = random_bev(6, 8, 7, 7), h = random_bev(7, 8, 7, 7);
  const auto a = caf_fuse(l, h, w, {8, 4}), b = caf_fuse(h, l, w, {8, 4});
  CHECK(a.affinity.array().maxCoeff() == 0.5f);
  CHECK(a.affinity.array().minCoeff() == 0.5f);
  CHECK(max_abs_diff(a.fused, b.fused) <= 1e-7);
}

TEST_CASE("bev probability") {
  const ProbNetConfig cfg{8, 4, 4};
  const Tensor x = random_bev(11, 8, 6, 6);
  const Tensor half = bev_probability(x, zero_bundle(probnet_weight_specs(cfg)), cfg);
  CHECK(half.shape() == Shape{1, 6, 6});
  for (float p : half.data()) CHECK(p == 0.5f);

  auto sat = zero_bundle(probnet_weight_specs(cfg));
  sat.at("prob.global.conv").bias = Tensor::full({1}, 100.0f);
  const Tensor high = bev_probability(x, sat, cfg);
  for (float p : high.data()) {
    CHECK(std::abs(p - 1.0f) <= 1e-6f);
    CHECK(p < 1.0f);
  }
  sat.at("prob.global.conv").bias = Tensor::full({1}, -200.0f);
  const Tensor low = bev_probability(x, sat, cfg);
  for (float p : low.data()) CHECK(p > 0.0f);
}

TEST_CASE("bev probability golden values for seed 11") {
  const ProbNetConfig cfg{8, 4, 4};
  const Tensor x = random_bev(11, 8, 6, 6);
  const Tensor p = bev_probability(x, seeded_bundle(probnet_weight_specs(cfg), 11), cfg);
  const Tensor again = bev_probability(x, seeded_bundle(probnet_weight_specs(cfg), 11), cfg);
  CHECK(p.bitwise_equal(again));
  for (float v : p.data()) {
    CHECK(v > 0.0f);
    CHECK(v < 1.0f);
  }
  // Captured once from this configuration; any change to ProbNet or the weight stream shows up here.
  const float golden[] = {0x1.2ed0b6p-1f, 0x1.28818p-1f, 0x1.fcdfbap-2f, 0x1.07b0d2p-1f, 0x1.fe1238p-2f, 0x1.f480b8p-2f};
  for (std::size_t i = 0; i < 6; ++i) CHECK(p[i * 7] == golden[i]);
}

TEST_CASE("assemble_final scales by P and never grows the max norm") {
  const Tensor f = random_bev(12, 4, 5, 5);
  CHECK(assemble_final(f, Tensor::full({1, 5, 5}, 1.0f)).bitwise_equal(f));
  const Tensor half = assemble_final(f, Tensor::full({1, 5, 5}, 0.5f));
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(half[i] == f[i] / 2);
  Rng rng(1);
  const Tensor p = rng_uniform(rng, {1, 5, 5}, 0.0f, 1.0f);
  CHECK(assemble_final(f, p).array().abs().maxCoeff() <= f.array().abs().maxCoeff());
  CHECK_THROWS_AS(assemble_final(f, Tensor({1, 4, 5})), Error);
}

TEST_CASE("full pipeline: masking, forced affinity and thread independence") {
  const BevGridSpec grid{-30, 30, -30, 30, 40, 40};
  const auto bundle = fixtures::random_scene(4, grid, DepthBinSpec{}, 16);
  ViewGeometry geo;
  geo.rigs = bundle.rigs;
  geo.grid = grid;
  const auto tables = precompute_tables(geo);
  const DffConfig cfg = DffConfig::for_channels(16);
  const auto w = seeded_bundle(dff_weight_specs(cfg), 11);

  PipelineOptions opt;
  const auto base = run_dualbev(bundle.views, geo, &tables, w, cfg, opt);
  for (float p : base.prob.data()) {
    CHECK(p > 0.0f);
    CHECK(p < 1.0f);
  }
  opt.threads = 4;
  const auto threaded = run_dualbev(bundle.views, geo, &tables, w, cfg, opt);
  CHECK(threaded.fused.bitwise_equal(base.fused));
  CHECK(run_dualbev(bundle.views, geo, nullptr, w, cfg, opt).fused.bitwise_equal(base.fused));

  PipelineOptions forced;
  forced.force_affinity = 1.0f;
  forced.force_prob_one = true;
  const auto pure = run_dualbev(bundle.views, geo, &tables, w, cfg, forced);
  CHECK(pure.fused.bitwise_equal(lss_pool(bundle.views, tables.lss, WeightMode::DepthMask)));

  ViewInputs masked = bundle.views;
  masked.mask = Tensor(masked.mask.shape());
  const auto zero = run_dualbev(masked, geo, &tables, w, cfg, PipelineOptions{});
  CHECK(zero.f_lss.array().abs().maxCoeff() == 0.0f);
  CHECK(zero.f_ht.array().abs().maxCoeff() == 0.0f);
  CHECK(zero.fused.array().abs().maxCoeff() == 0.0f);
}

TEST_CASE("occupancy statistics") {
  Tensor f({2, 1, 3});
  f(0, 0, 0) = 3.0f;
  f(1, 0, 0) = 4.0f;
  f(0, 0, 1) = 1.0f;
  const Tensor gt({1, 1, 3}, {1.0f, 0.0f, 0.0f});
  const auto s = occupancy_stats(f, gt);
  CHECK(s.occupied_cells == 1);
  CHECK(s.empty_cells == 2);
  CHECK(s.mean_occupied == 5.0);
  CHECK(s.mean_empty == 0.5);
  CHECK(s.separation() == 4.5);
  CHECK_THROWS_AS(occupancy_stats(f, Tensor({1, 2, 3})), Error);
}
