#pragma once

#include <cstdint>
#include <vector>

#include "wavesim/gemm.hpp"

namespace wavesim::oracle {

// Row-major dense matrix of 32-bit integers (exact arithmetic keeps the
// output check free of float tolerance).
struct Mat {
  int64_t rows = 0, cols = 0;
  std::vector<int64_t> v;
  Mat() = default;
  Mat(int64_t r, int64_t c) : rows(r), cols(c), v(static_cast<size_t>(r * c), 0) {}
  int64_t& at(int64_t r, int64_t c) { return v[static_cast<size_t>(r * cols + c)]; }
  int64_t at(int64_t r, int64_t c) const { return v[static_cast<size_t>(r * cols + c)]; }
};

struct TileRun {
  int64_t cycles = 0;
  std::vector<int64_t> active_pes;  // useful MACs executed per cycle
  Mat c;                            // accumulated output tile
  int64_t total_macs() const;
};

// Cycle-accurate simulation of one output tile on a rows x cols PE grid.
// A is tile_height x K, B is K x tile_width; the K dimension is cut into
// ceil(K / rows) waves. Every PE carries two weight registers and a select
// bit; data moves one hop per cycle (A right, partial sums down, weight fill
// sweeping diagonally one row/column per cycle). Gapped mode serializes the
// weight fill between waves; double buffering loads the next wave's weights
// into the spare register while the current wave streams.
TileRun simulate_tile(const Mat& a, const Mat& b, int64_t grid_rows, int64_t grid_cols,
                      WaveMode mode);

// Schoolbook reference product for the output check.
Mat matmul_reference(const Mat& a, const Mat& b);

}  // namespace wavesim::oracle
