#include <doctest.h>

#include <cmath>

#include "dualbev/error.hpp"
#include "dualbev/heighttrans.hpp"
#include "fixtures.hpp"

using namespace dualbev;

namespace {

const DepthBinSpec kDepth{};

// One 1 m cell centered 10 m ahead of a forward camera with a wide vertical view.
struct AheadFixture {
  std::vector<CameraRig> rigs{fixtures::forward_camera(44, 16, 8.0)};
  BevGridSpec grid{9.5, 10.5, -0.5, 0.5, 1, 1};
};

ViewInputs constant_inputs(std::size_t cams, std::size_t c, std::size_t h, std::size_t w, float i,
                           float d, float m) {
  return {Tensor::full({cams, c, h, w}, i), Tensor::full({cams, 112, h, w}, d),
          Tensor::full({cams, 1, h, w}, m)};
}

}  // namespace

TEST_CASE("a cell ahead of a wide camera gets one entry per height") {
  AheadFixture fx;
  const HeightSet heights = make_height_samples(HeightMode::multi_res());
  const auto table = precompute_ht_table(fx.rigs, fx.grid, heights, kDepth);
  CHECK(table.size() == 13);
  CHECK(table.cell_count(0) == 13);
  for (const auto& r : table.records()) {
    CHECK(r.cam == 0);
    CHECK(r.feat_index % 44 == 22);  // u = round(21.5)
    CHECK(r.depth_index / (44 * 16) == 16);  // bin round(15.5), half away from zero
  }
}

TEST_CASE("a camera facing away from the grid yields an empty table") {
  const std::vector<CameraRig> rigs{fixtures::forward_camera(44, 16)};
  const BevGridSpec behind{-40.0, -5.0, -10.0, 10.0, 35, 20};
  const auto table =
      precompute_ht_table(rigs, behind, make_height_samples(HeightMode::multi_res()), kDepth);
  CHECK(table.empty());
  const auto f = ht_transform_fast(fixtures::random_inputs(1, 1, 4, 16, 44, 112), table);
  CHECK(f.array().abs().maxCoeff() == 0.0f);
}

TEST_CASE("table build is deterministic and round-trips through its binary form") {
  const auto rigs = make_ring_rigs(6, 44, 16, RingCameraSpec{});
  const auto heights = make_height_samples(HeightMode::multi_res());
  const auto a = precompute_ht_table(rigs, BevGridSpec{}, heights, kDepth);
  const auto b = precompute_ht_table(rigs, BevGridSpec{}, heights, kDepth);
  const auto bytes = encode_table(a);
  CHECK(bytes == encode_table(b));
  CHECK(decode_table<TableKind::HeightTrans>(bytes) == a);
  for (std::size_t c = 0; c < a.geometry().n_cells(); ++c) CHECK(a.cell_count(c) <= 13 * 6);

  auto corrupt = bytes;
  corrupt[0] = 'X';
  CHECK_THROWS_AS(decode_table<TableKind::HeightTrans>(corrupt), Error);
  // An LSS table file is not accepted as a HeightTrans table.
  CHECK_THROWS_AS(decode_table<TableKind::LssPool>(bytes), Error);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  CHECK_THROWS_AS(decode_table<TableKind::HeightTrans>(truncated), Error);
}

TEST_CASE("table constructor rejects out-of-range and unsorted records") {
  const TableGeometry g{1, 2, 2, 112, 1, 2};
  CHECK_NOTHROW(HtLookupTable(g, {{0, 0, 3, 3}, {1, 0, 0, 0}}));
  CHECK_THROWS_AS(HtLookupTable(g, {{2, 0, 0, 0}}), Error);
  CHECK_THROWS_AS(HtLookupTable(g, {{0, 1, 0, 0}}), Error);
  CHECK_THROWS_AS(HtLookupTable(g, {{0, 0, 4, 4}}), Error);
  CHECK_THROWS_AS(HtLookupTable(g, {{0, 0, 1, 2}}), Error);
  CHECK_THROWS_AS(HtLookupTable(g, {{1, 0, 0, 0}, {0, 0, 0, 0}}), Error);
}

TEST_CASE("single-entry and empty tables") {
  const TableGeometry g{1, 1, 1, 112, 1, 1};
  ViewInputs in = constant_inputs(1, 2, 1, 1, 2.0f, 0.0f, 1.0f);
  in.depth[5] = 0.5f;
  const HtLookupTable one(g, {{0, 0, 0, 5}});
  const Tensor f = ht_transform_fast(in, one);
  CHECK(f(0, 0, 0) == 1.0f);
  CHECK(ht_transform_fast(in, HtLookupTable(g, {})).array().abs().maxCoeff() == 0.0f);
}

TEST_CASE("constant fields give count / C_D per cell") {
  const auto rigs = make_ring_rigs(6, 44, 16, RingCameraSpec{});
  const BevGridSpec grid{-20, 20, -20, 20, 40, 40};
  const auto table = precompute_ht_table(rigs, grid, make_height_samples(HeightMode::multi_res()), kDepth);
  const ViewInputs in = constant_inputs(6, 3, 16, 44, 1.0f, 1.0f / 112, 1.0f);
  const Tensor f = ht_transform_fast(in, table);
  std::size_t nonempty = 0;
  for (std::size_t cell = 0; cell < grid.n_cells(); ++cell) {
    const double expect = static_cast<double>(table.cell_count(cell)) / 112.0;
    nonempty += table.cell_count(cell) > 0;
    for (std::size_t c = 0; c < 3; ++c) CHECK(f[c * grid.n_cells() + cell] == doctest::Approx(expect).epsilon(1e-6));
  }
  CHECK(nonempty > 100);
  const Tensor zero = ht_transform_fast(constant_inputs(6, 3, 16, 44, 1.0f, 1.0f / 112, 0.0f), table);
  CHECK(zero.array().abs().maxCoeff() == 0.0f);
}

TEST_CASE("a one-hot depth at the projected bin passes the pixel feature through") {
  AheadFixture fx;
  const HeightSet ground{{0.0}, HeightMode::uniform(1)};
  ViewInputs in = fixtures::random_inputs(3, 1, 5, 16, 44, 112);
  in.depth = Tensor({1, 112, 16, 44});
  for (std::size_t p = 0; p < 16 * 44; ++p) in.depth[16 * 16 * 44 + p] = 1.0f;
  in.mask = Tensor::full({1, 1, 16, 44}, 1.0f);
  const Tensor naive = ht_transform_naive(in, fx.rigs, fx.grid, ground, kDepth, SamplerMode::Round);
  for (std::size_t c = 0; c < 5; ++c) CHECK(naive(c, 0, 0) == in.features.slice(0)(c, 8, 22));
  const auto table = precompute_ht_table(fx.rigs, fx.grid, ground, kDepth);
  CHECK(ht_transform_fast(in, table).bitwise_equal(naive));
}

TEST_CASE("fast path equals naive Round bitwise on random rigs and inputs") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    RingCameraSpec cam;
    cam.yaw_step_deg = 50.0 + 5.0 * static_cast<double>(seed);
    cam.mount_height = 1.0 + 0.2 * static_cast<double>(seed);
    const auto rigs = make_ring_rigs(static_cast<int>(2 + seed), 20, 10, cam);
    const BevGridSpec grid{-30, 30, -30, 30, 48, 48};
    const auto heights = make_height_samples(HeightMode::multi_res());
    const ViewInputs in = fixtures::random_inputs(seed, rigs.size(), 8, 10, 20, 112);
    const auto table = precompute_ht_table(rigs, grid, heights, kDepth);
    const Tensor naive = ht_transform_naive(in, rigs, grid, heights, kDepth, SamplerMode::Round);
    CHECK(ht_transform_fast(in, table, 1).bitwise_equal(naive));
    CHECK(ht_transform_fast(in, table, 3).bitwise_equal(naive));
  }
}

TEST_CASE("Interp and Round stay close on smooth fields") {
  const auto rigs = make_ring_rigs(6, 44, 16, RingCameraSpec{});
  const BevGridSpec grid{};
  const auto heights = make_height_samples(HeightMode::multi_res());
  const ViewInputs in = fixtures::smooth_inputs(6, 8, 16, 44, 112);
  const Tensor round = ht_transform_naive(in, rigs, grid, heights, kDepth, SamplerMode::Round);
  const Tensor interp = ht_transform_naive(in, rigs, grid, heights, kDepth, SamplerMode::Interp);
  const double gap = relative_l2(interp, round);
  MESSAGE("relative L2 gap between Interp and Round: " << gap);
  CHECK(gap > 0.0);
  CHECK(gap <= 0.15);
}

TEST_CASE("raising a mask pixel never lowers accumulated values for nonnegative fields") {
  const auto rigs = make_ring_rigs(3, 20, 10, RingCameraSpec{});
  const BevGridSpec grid{-30, 30, -30, 30, 40, 40};
  const auto table = precompute_ht_table(rigs, grid, make_height_samples(HeightMode::multi_res()), kDepth);
  ViewInputs in = fixtures::random_inputs(8, 3, 4, 10, 20, 112, 0.0f);
  const Tensor before = ht_transform_fast(in, table);
  Rng rng(8);
  for (int n = 0; n < 20; ++n) {
    const std::size_t p = rng.next_u64() % in.mask.size();
    in.mask[p] = std::min(1.0f, in.mask[p] + 0.3f);
  }
  const Tensor after = ht_transform_fast(in, table);
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(after[i] >= before[i]);
}

TEST_CASE("input validation") {
  const auto rigs = make_ring_rigs(2, 20, 10, RingCameraSpec{});
  const BevGridSpec grid{-10, 10, -10, 10, 8, 8};
  const auto heights = make_height_samples(HeightMode::multi_res());
  const auto table = precompute_ht_table(rigs, grid, heights, kDepth);
  const ViewInputs wrong = fixtures::random_inputs(1, 3, 4, 10, 20, 112);
  CHECK_THROWS_AS(ht_transform_fast(wrong, table), Error);
  CHECK_THROWS_AS(ht_transform_naive(wrong, rigs, grid, heights, kDepth, SamplerMode::Round), Error);
  CHECK_THROWS_AS(precompute_ht_table({}, grid, heights, kDepth), Error);
}
