#pragma once

#include "wavesim/ir.hpp"

namespace wavesim {

enum class GemmPhase { Forward, DataGrad, WeightGrad };
enum class WaveMode { Gapped, DoubleBuffered };

struct GemmShape {
  int64_t g_h = 1;  // rows of A / C
  int64_t g_w = 1;  // cols of B / C
  int64_t k = 1;    // reduction depth
  int64_t macs() const { return g_h * g_w * k; }
};

struct ArrayConfig {
  int64_t pe_rows = 128;               // systolic array height (wave depth)
  int64_t pe_cols = 128;               // systolic array width
  int64_t a_half_buffer = 64 * 1024;   // bytes per A half-buffer
  int64_t b_half_buffer = 32 * 1024;   // bytes per B half-buffer
  int64_t accum_buffer = 128 * 1024;   // bytes per output-tile part
  int feature_bytes = 2;
  void validate() const;
};

struct TilePlan {
  GemmShape gemm;
  int64_t tile_height = 1;     // m, rows streamed per wave of a full tile
  int64_t tile_width = 1;      // min(g_w, pe_cols)
  int64_t tiles = 1;           // ceil(g_h/m) * ceil(g_w/n)
  int64_t waves_per_tile = 1;  // ceil(k / pe_rows)
};

// GEMM dimensions of an im2col convolution for each training phase:
//   Forward:    (N*Ho*Wo, Co, Ci*R*S)
//   DataGrad:   (N*Hi*Wi, Ci, Co*R*S)
//   WeightGrad: (Ci*R*S,  Co, N*Ho*Wo)
GemmShape im2col_dims(const LayerNode& l, GemmPhase phase, int64_t sub_batch);

// Blocks the GEMM into m x n output tiles. The tile height is the largest A
// slab the local buffer can hold at the wave depth: m = a_half / (k_eff * word).
TilePlan tile(const GemmShape& g, const ArrayConfig& a);

// Cycles to compute one m_t x w_t output tile.
// Gapped reloads weights between waves (k idle cycles each); double buffering
// pays the fill once. Both end with a k + w_t pipeline drain.
int64_t tile_cycles(int64_t tile_height, int64_t tile_width, int64_t waves, int64_t array_rows,
                    WaveMode mode);

// Total cycles over the whole tile grid (edge tiles clipped).
int64_t gemm_cycles(const GemmShape& g, const ArrayConfig& a, WaveMode mode);

// Useful-MAC occupancy of the array across the GEMM, in (0, 1].
double gemm_utilization(const GemmShape& g, const ArrayConfig& a, WaveMode mode);

}  // namespace wavesim
