#include "wavesim/gemm.hpp"

#include <algorithm>

namespace wavesim {

namespace {
int64_t ceil_div(int64_t a, int64_t b) { return (a + b - 1) / b; }
}

void ArrayConfig::validate() const {
  if (pe_rows < 1 || pe_cols < 1) throw Error("array dims must be >= 1");
  if (b_half_buffer < pe_rows * pe_cols * feature_bytes)
    throw Error("B half-buffer must hold one full weight block");
  if (a_half_buffer < 2 * b_half_buffer)
    throw Error("A half-buffers must be at least twice the B half-buffer");
}

GemmShape im2col_dims(const LayerNode& l, GemmPhase phase, int64_t sub_batch) {
  if (!l.is_gemm()) throw Error(l.name + ": im2col dims need a conv or fc layer");
  const ConvSpec& c = l.conv;
  const TensorShape& in = l.in_shapes.front();
  const TensorShape& out = l.out_shape;
  switch (phase) {
    case GemmPhase::Forward:
      return {sub_batch * out.h * out.w, c.c_out, c.c_in * c.r * c.s};
    case GemmPhase::DataGrad:
      return {sub_batch * in.h * in.w, c.c_in, c.c_out * c.r * c.s};
    case GemmPhase::WeightGrad:
      return {c.c_in * c.r * c.s, c.c_out, sub_batch * out.h * out.w};
  }
  throw Error("bad phase");
}

TilePlan tile(const GemmShape& g, const ArrayConfig& a) {
  if (g.g_h < 1 || g.g_w < 1 || g.k < 1) throw Error("gemm dims must be >= 1");
  TilePlan plan;
  plan.gemm = g;
  int64_t k_eff = std::min(g.k, a.pe_rows);
  plan.tile_height = std::max<int64_t>(a.a_half_buffer / (k_eff * a.feature_bytes), 1);
  plan.tile_height = std::min(plan.tile_height, g.g_h);
  plan.tile_width = std::min(g.g_w, a.pe_cols);
  plan.waves_per_tile = ceil_div(g.k, a.pe_rows);
  plan.tiles = ceil_div(g.g_h, plan.tile_height) * ceil_div(g.g_w, a.pe_cols);
  return plan;
}

int64_t tile_cycles(int64_t tile_height, int64_t tile_width, int64_t waves, int64_t array_rows,
                    WaveMode mode) {
  int64_t drain = array_rows + tile_width;
  if (mode == WaveMode::Gapped) return waves * (array_rows + tile_height) + drain;
  return array_rows + waves * tile_height + drain;
}

// Tiles of one GEMM sweep through the array back to back: the next tile's
// weights load behind the current tile's last wave (the same mechanism that
// removes inter-wave gaps) and the triple-buffered accumulator drains the
// finished tile while the next one streams. Only the first fill and the last
// drain stick out; gapped mode still pays the fill for every wave.
int64_t gemm_cycles(const GemmShape& g, const ArrayConfig& a, WaveMode mode) {
  TilePlan p = tile(g, a);
  int64_t tiles_h = (g.g_h + p.tile_height - 1) / p.tile_height;
  int64_t strips = (g.g_w + a.pe_cols - 1) / a.pe_cols;
  int64_t w_last = g.g_w % a.pe_cols == 0 ? p.tile_width : g.g_w % a.pe_cols;
  int64_t stream = p.waves_per_tile * g.g_h * strips;  // A rows through the array
  int64_t drain = a.pe_rows + w_last;
  if (mode == WaveMode::DoubleBuffered) return a.pe_rows + stream + drain;
  int64_t fills = p.waves_per_tile * tiles_h * strips * a.pe_rows;
  return fills + stream + drain;
}

double gemm_utilization(const GemmShape& g, const ArrayConfig& a, WaveMode mode) {
  int64_t cycles = gemm_cycles(g, a, mode);
  return static_cast<double>(g.macs()) /
         (static_cast<double>(a.pe_rows * a.pe_cols) * static_cast<double>(cycles));
}

}  // namespace wavesim
