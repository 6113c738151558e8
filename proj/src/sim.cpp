#include "wavesim/sim.hpp"

#include <algorithm>
#include <cmath>

namespace wavesim {

namespace {

int64_t ceil_div(int64_t a, int64_t b) { return (a + b - 1) / b; }

struct GemmWork {
  int64_t cycles = 0;
  int64_t macs = 0;
  int64_t lbuf_bytes = 0;
};

// Cycle and local-buffer cost of one GEMM invocation.
GemmWork gemm_work(const GemmShape& g, const ArrayConfig& a, WaveMode mode, int accum_bytes) {
  GemmWork w;
  w.cycles = gemm_cycles(g, a, mode);
  w.macs = g.macs();
  TilePlan p = tile(g, a);
  int64_t row_strips = ceil_div(g.g_h, p.tile_height);
  int64_t col_strips = ceil_div(g.g_w, a.pe_cols);
  // A is re-streamed per column strip, B per row strip; the output tile is
  // accumulated in 32b across waves and quantized once on the way out.
  w.lbuf_bytes = col_strips * g.g_h * g.k * a.feature_bytes +
                 row_strips * g.k * g.g_w * a.feature_bytes +
                 g.g_h * g.g_w * ((2 * p.waves_per_tile - 1) * accum_bytes + a.feature_bytes);
  return w;
}

// Sub-batch slices of one group: `iterations - 1` full slices plus the rest.
struct Slices {
  int64_t full_count = 0;
  int64_t full = 0;
  int64_t last = 0;
};
Slices slices_of(int64_t mini_batch, int64_t sub_batch) {
  Slices s;
  s.full = sub_batch;
  int64_t iters = ceil_div(mini_batch, sub_batch);
  s.full_count = iters - 1;
  s.last = mini_batch - s.full_count * sub_batch;
  return s;
}

}  // namespace

SimReport simulate(const NetworkGraph& net, const MbsSchedule& schedule,
                   const AcceleratorConfig& accel, const MemoryConfig& mem,
                   const EnergyModel& energy) {
  accel.array.validate();
  const ScheduleParams sp = accel.sched_params();
  const WaveMode mode = wave_mode(schedule.config);
  const int accum_bytes = accel.precision.accum_bits / 8;

  SimReport r;
  r.network = net.name();
  r.config = schedule.config;
  r.memory = mem.name;
  r.mini_batch = schedule.mini_batch;
  r.schedule = schedule;

  TrafficReport traffic = compute_traffic(net, schedule, sp);
  r.dram = traffic.totals;
  r.gbuf_bytes = traffic.gbuf_bytes;

  // DRAM capacity: weights and gradient partials plus everything checkpointed
  // or spilled must fit beside the working set.
  int64_t resident_dram = 0;
  for (const auto& l : net.layers())
    if (l.is_gemm())
      resident_dram += 2 * (bits_to_bytes(l.conv.weight_elems(), accel.precision.weight_bits));
  resident_dram += r.dram.checkpoints_fwd_write + r.dram.features_out + r.dram.relu_grad_bits / 2;
  resident_dram += 2 * net.input_shape().bytes(accel.precision.feature_bits) * schedule.mini_batch;
  if (resident_dram > mem.capacity_bytes)
    throw Error("working set " + std::to_string(resident_dram) + " B exceeds DRAM capacity of " +
                mem.name);

  const double bytes_per_cycle =
      mem.unlimited ? 0.0 : mem.bandwidth_bytes_per_s * mem.efficiency / accel.clock_hz;
  auto mem_cycles = [&](int64_t bytes) -> int64_t {
    if (mem.unlimited || bytes <= 0) return 0;
    return static_cast<int64_t>(std::ceil(static_cast<double>(bytes) / bytes_per_cycle));
  };

  r.fwd_layers.resize(net.layers().size());
  r.bwd_layers.resize(net.layers().size());

  int64_t convfc_macs = 0, convfc_cycles = 0;

  for (const auto& l : net.layers()) {
    int gi = schedule.group_of_layer(net, l.id);
    const LayerGroup& g = schedule.groups.at(static_cast<size_t>(gi));
    Slices sl = slices_of(schedule.mini_batch, g.sub_batch);

    LayerTiming fwd, bwd;
    fwd.layer = bwd.layer = l.id;
    const LayerTraffic& lt = traffic.per_layer.at(static_cast<size_t>(l.id));
    fwd.dram_bytes = lt.fwd_dram.total();
    bwd.dram_bytes = lt.bwd_dram.total();
    fwd.memory_cycles = mem_cycles(fwd.dram_bytes);
    bwd.memory_cycles = mem_cycles(bwd.dram_bytes);

    if (l.is_gemm()) {
      auto add_phase = [&](GemmPhase ph, LayerTiming& t) {
        GemmWork full = gemm_work(im2col_dims(l, ph, sl.full), accel.array, mode, accum_bytes);
        t.compute_cycles += sl.full_count * full.cycles;
        t.macs += sl.full_count * full.macs;
        r.lbuf_bytes += sl.full_count * full.lbuf_bytes;
        if (sl.last > 0) {
          GemmWork last = gemm_work(im2col_dims(l, ph, sl.last), accel.array, mode, accum_bytes);
          t.compute_cycles += last.cycles;
          t.macs += last.macs;
          r.lbuf_bytes += last.lbuf_bytes;
        }
      };
      add_phase(GemmPhase::Forward, fwd);
      add_phase(GemmPhase::WeightGrad, bwd);
      if (l.inputs.front() != kInputId) add_phase(GemmPhase::DataGrad, bwd);

      fwd.wall_cycles = std::max(fwd.compute_cycles, fwd.memory_cycles);
      bwd.wall_cycles = std::max(bwd.compute_cycles, bwd.memory_cycles);
      int64_t pes = accel.array.pe_rows * accel.array.pe_cols;
      if (fwd.compute_cycles > 0)
        fwd.utilization = static_cast<double>(fwd.macs) /
                          (static_cast<double>(pes) * static_cast<double>(fwd.compute_cycles));
      if (bwd.compute_cycles > 0)
        bwd.utilization = static_cast<double>(bwd.macs) /
                          (static_cast<double>(pes) * static_cast<double>(bwd.compute_cycles));
      convfc_macs += fwd.macs + bwd.macs;
      convfc_cycles += fwd.compute_cycles + bwd.compute_cycles;
    } else {
      // Bandwidth-bound vector layers: DRAM time, floored by the global
      // buffer streaming rate.
      int64_t fwd_stream = static_cast<int64_t>(
          std::ceil(static_cast<double>(lt.fwd_vector_bytes) / accel.vector_bytes_per_cycle));
      int64_t bwd_stream = static_cast<int64_t>(
          std::ceil(static_cast<double>(lt.bwd_vector_bytes) / accel.vector_bytes_per_cycle));
      fwd.wall_cycles = std::max(fwd.memory_cycles, fwd_stream);
      bwd.wall_cycles = std::max(bwd.memory_cycles, bwd_stream);
    }
    r.total_macs += fwd.macs + bwd.macs;
    r.compute_cycles += fwd.compute_cycles + bwd.compute_cycles;
    r.memory_cycles += fwd.memory_cycles + bwd.memory_cycles;
    r.wall_cycles += fwd.wall_cycles + bwd.wall_cycles;
    r.fwd_layers[static_cast<size_t>(l.id)] = fwd;
    r.bwd_layers[static_cast<size_t>(l.id)] = bwd;
  }

  if (convfc_cycles > 0)
    r.utilization_convfc =
        static_cast<double>(convfc_macs) /
        (static_cast<double>(accel.array.pe_rows * accel.array.pe_cols) *
         static_cast<double>(convfc_cycles));
  r.seconds = static_cast<double>(r.wall_cycles) / accel.clock_hz;
  r.energy = energy_report(r, energy);
  return r;
}

SimReport simulate_config(const NetworkGraph& net, const AcceleratorConfig& accel,
                          const MemoryConfig& mem, const EnergyModel& energy, int64_t mini_batch,
                          ExecConfig config) {
  MbsSchedule s = build_schedule(net, accel.sched_params(), mini_batch, config);
  return simulate(net, s, accel, mem, energy);
}

std::vector<SimReport> compare_configs(const NetworkGraph& net, const AcceleratorConfig& accel,
                                       const MemoryConfig& mem, const EnergyModel& energy,
                                       int64_t mini_batch) {
  std::vector<SimReport> out;
  for (ExecConfig c : {ExecConfig::Baseline, ExecConfig::ArchOpt, ExecConfig::IL,
                       ExecConfig::MbsFS, ExecConfig::Mbs1, ExecConfig::Mbs2})
    out.push_back(simulate_config(net, accel, mem, energy, mini_batch, c));
  return out;
}

std::vector<BufferSweepRow> sweep_buffer(const NetworkGraph& net, AcceleratorConfig accel,
                                         const MemoryConfig& mem, const EnergyModel& energy,
                                         int64_t mini_batch, ExecConfig config,
                                         const std::vector<int64_t>& sizes) {
  std::vector<BufferSweepRow> rows;
  for (int64_t size : sizes) {
    accel.global_buffer_bytes = size;
    rows.push_back({size, simulate_config(net, accel, mem, energy, mini_batch, config)});
  }
  return rows;
}

std::vector<SimReport> sweep_memory(const NetworkGraph& net, const AcceleratorConfig& accel,
                                    const EnergyModel& energy, int64_t mini_batch,
                                    ExecConfig config, const std::vector<MemoryConfig>& mems) {
  std::vector<SimReport> out;
  for (const MemoryConfig& m : mems)
    out.push_back(simulate_config(net, accel, m, energy, mini_batch, config));
  return out;
}

EnergyBreakdown energy_report(const SimReport& r, const EnergyModel& e) {
  EnergyBreakdown b;
  const double pj = 1e-12;
  b.mac_j = (1.0 - e.zero_operand_fraction) * static_cast<double>(r.total_macs) * e.e_mac_pj * pj;
  b.dram_j = static_cast<double>(r.dram.total()) * e.e_dram_pj_per_byte * pj;
  b.gbuf_j = static_cast<double>(r.gbuf_bytes) * e.e_gbuf_pj_per_byte * pj;
  b.lbuf_j = static_cast<double>(r.lbuf_bytes) * e.e_lbuf_pj_per_byte * pj;
  b.static_j = e.p_static_w * r.seconds;
  return b;
}

}  // namespace wavesim
