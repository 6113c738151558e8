#include <doctest.h>

#include "helpers.hpp"
#include "wavesim/gemm.hpp"
#include "wavesim/oracle/pe_sim.hpp"
#include "wavesim/trainer.hpp"

using namespace wavesim;

namespace {

LayerNode make_conv(int64_t c_in, int64_t c_out, int64_t k, int64_t stride, int64_t pad,
                    int64_t h_in, int64_t w_in) {
  NetworkGraph net = parse_network(
      "net t\ninput c=" + std::to_string(c_in) + " h=" + std::to_string(h_in) +
      " w=" + std::to_string(w_in) + "\nconv c from=input cout=" + std::to_string(c_out) +
      " k=" + std::to_string(k) + " stride=" + std::to_string(stride) +
      " pad=" + std::to_string(pad) + "\n");
  return *net.find("c");
}

oracle::Mat random_mat(ref::Rng& rng, int64_t r, int64_t c) {
  oracle::Mat m(r, c);
  for (auto& v : m.v) v = rng.uniform_int(-4, 4);
  return m;
}

}  // namespace

TEST_CASE("im2col dims per phase") {
  LayerNode c = make_conv(64, 64, 1, 1, 0, 56, 56);
  GemmShape f = im2col_dims(c, GemmPhase::Forward, 2);
  CHECK(f.g_h == 6272);
  CHECK(f.g_w == 64);
  CHECK(f.k == 64);
  GemmShape wg = im2col_dims(c, GemmPhase::WeightGrad, 2);
  CHECK(wg.g_h == 64);
  CHECK(wg.g_w == 64);
  CHECK(wg.k == 6272);
  GemmShape dg = im2col_dims(c, GemmPhase::DataGrad, 2);
  CHECK(dg.g_h == 2LL * 56 * 56);
  CHECK(dg.g_w == 64);
  CHECK(dg.k == 64);

  LayerNode unit = make_conv(1, 1, 1, 1, 0, 1, 1);
  GemmShape g1 = im2col_dims(unit, GemmPhase::Forward, 1);
  CHECK(g1.g_h == 1);
  CHECK(g1.g_w == 1);
  CHECK(g1.k == 1);
}

TEST_CASE("forward GEMM MACs equal conv_macs exactly for every bundled conv") {
  for (const char* name : {"resnet50", "inception_v3", "inception_v4", "alexnet"}) {
    NetworkGraph net = load_bundled(name);
    for (const auto& l : net.layers()) {
      if (!l.is_gemm()) continue;
      CHECK(im2col_dims(l, GemmPhase::Forward, 7).macs() == conv_macs(l, 7));
    }
  }
}

TEST_CASE("tile plan geometry") {
  ArrayConfig a;  // 128x128, 64 KiB A half-buffer, 2B words
  GemmShape g{6272, 64, 64};
  TilePlan p = tile(g, a);
  CHECK(p.tile_height == 512);  // 65536 / (64*2)
  CHECK(p.waves_per_tile == 1);
  CHECK(p.tiles == 13);
  CHECK(p.tile_width == 64);

  GemmShape g2{6272, 64, 256};
  TilePlan p2 = tile(g2, a);
  CHECK(p2.waves_per_tile == 2);
  CHECK(p2.tile_height == 256);  // full wave depth bounds the A slab
}

TEST_CASE("tile cycle formulas") {
  // waves=1: both modes coincide.
  CHECK(tile_cycles(512, 64, 1, 128, WaveMode::Gapped) ==
        tile_cycles(512, 64, 1, 128, WaveMode::DoubleBuffered));
  // k=128, m=512, waves=4, width=128.
  CHECK(tile_cycles(512, 128, 4, 128, WaveMode::Gapped) == 2816);
  CHECK(tile_cycles(512, 128, 4, 128, WaveMode::DoubleBuffered) == 2432);
  CHECK(2816 - 2432 == 3 * 128);
}

TEST_CASE("double buffering beats gapped exactly by (waves-1)*k per tile") {
  for (int64_t k : {4, 7, 16}) {
    for (int64_t waves : {1, 2, 5}) {
      for (int64_t m : {3, 17}) {
        int64_t gap = tile_cycles(m, k, waves, k, WaveMode::Gapped);
        int64_t db = tile_cycles(m, k, waves, k, WaveMode::DoubleBuffered);
        CHECK(gap - db == (waves - 1) * k);
      }
    }
  }
}

TEST_CASE("cycle-accurate oracle matches the analytic formulas on a shape lattice") {
  ref::Rng rng(7);
  for (int64_t k : {1, 2, 3, 5, 8, 16}) {
    for (int64_t n : {1, 2, 4, 16}) {
      for (int64_t m : {1, 2, 5, 16, 33, 64}) {
        for (int64_t big_k : {k, 2 * k - 1 > 0 ? 2 * k - 1 : 1, 3 * k, 8 * k}) {
          for (int64_t width : {int64_t{1}, n}) {
            if (width > n || big_k < 1) continue;
            int64_t waves = (big_k + k - 1) / k;
            if (waves > 8) continue;
            oracle::Mat a = random_mat(rng, m, big_k);
            oracle::Mat b = random_mat(rng, big_k, width);
            oracle::Mat ref_c = oracle::matmul_reference(a, b);
            for (WaveMode mode : {WaveMode::Gapped, WaveMode::DoubleBuffered}) {
              oracle::TileRun run = oracle::simulate_tile(a, b, k, n, mode);
              REQUIRE(run.cycles == tile_cycles(m, width, waves, k, mode));
              REQUIRE(run.total_macs() == m * width * big_k);
              for (int64_t i = 0; i < m; ++i)
                for (int64_t j = 0; j < width; ++j) REQUIRE(run.c.at(i, j) == ref_c.at(i, j));
            }
          }
        }
      }
    }
  }
}

TEST_CASE("oracle: 1x1 grid multiplies two scalars in minimal cycles") {
  oracle::Mat a(1, 1), b(1, 1);
  a.at(0, 0) = 3;
  b.at(0, 0) = -7;
  auto run = oracle::simulate_tile(a, b, 1, 1, WaveMode::DoubleBuffered);
  CHECK(run.c.at(0, 0) == -21);
  CHECK(run.cycles == tile_cycles(1, 1, 1, 1, WaveMode::DoubleBuffered));
}

TEST_CASE("oracle: 4x4 grid, A 6x8, B 8x4 saves exactly (waves-1)*k with double buffering") {
  ref::Rng rng(11);
  oracle::Mat a = random_mat(rng, 6, 8);
  oracle::Mat b = random_mat(rng, 8, 4);
  auto gap = oracle::simulate_tile(a, b, 4, 4, WaveMode::Gapped);
  auto db = oracle::simulate_tile(a, b, 4, 4, WaveMode::DoubleBuffered);
  CHECK(gap.cycles - db.cycles == 4);  // (2-1)*k
  oracle::Mat ref_c = oracle::matmul_reference(a, b);
  for (int64_t i = 0; i < 6; ++i)
    for (int64_t j = 0; j < 4; ++j) {
      CHECK(gap.c.at(i, j) == ref_c.at(i, j));
      CHECK(db.c.at(i, j) == ref_c.at(i, j));
    }
}

TEST_CASE("oracle output equals schoolbook product on random shapes") {
  for (uint64_t seed : {1, 2, 3, 4, 5}) {
    ref::Rng rng(seed);
    int64_t k = rng.uniform_int(1, 16), n = rng.uniform_int(1, 16);
    int64_t m = rng.uniform_int(1, 16), big_k = rng.uniform_int(1, 16);
    int64_t width = rng.uniform_int(1, static_cast<int>(n));
    oracle::Mat a = random_mat(rng, m, big_k);
    oracle::Mat b = random_mat(rng, big_k, width);
    oracle::Mat ref_c = oracle::matmul_reference(a, b);
    auto run = oracle::simulate_tile(a, b, k, n, WaveMode::Gapped);
    for (int64_t i = 0; i < m; ++i)
      for (int64_t j = 0; j < width; ++j) REQUIRE(run.c.at(i, j) == ref_c.at(i, j));
  }
}

TEST_CASE("MAC conservation and utilization ordering over a whole GEMM") {
  ArrayConfig a;
  a.pe_rows = 8;
  a.pe_cols = 8;
  a.a_half_buffer = 1024;
  a.b_half_buffer = 8 * 8 * 2;
  GemmShape g{100, 20, 30};
  for (WaveMode mode : {WaveMode::Gapped, WaveMode::DoubleBuffered}) {
    double util = gemm_utilization(g, a, mode);
    CHECK(util > 0.0);
    CHECK(util <= 1.0);
  }
  CHECK(gemm_utilization(g, a, WaveMode::DoubleBuffered) >
        gemm_utilization(g, a, WaveMode::Gapped));
}

TEST_CASE("partial tiles are clipped, never overcounted") {
  ArrayConfig a;
  GemmShape g{100, 20, 300};  // forces partial tiles in both dimensions
  TilePlan p = tile(g, a);
  CHECK(p.tile_height == 100);  // clipped to g_h
  CHECK(p.tile_width == 20);
  int64_t cycles = gemm_cycles(g, a, WaveMode::DoubleBuffered);
  CHECK(cycles == tile_cycles(100, 20, p.waves_per_tile, a.pe_rows, WaveMode::DoubleBuffered));
}
