#pragma once

#include <string>
#include <vector>

#include "wavesim/config.hpp"
#include "wavesim/traffic.hpp"

namespace wavesim {

struct EnergyBreakdown {
  double mac_j = 0, dram_j = 0, gbuf_j = 0, lbuf_j = 0, static_j = 0;
  double total() const { return mac_j + dram_j + gbuf_j + lbuf_j + static_j; }
};

struct LayerTiming {
  int layer = -1;
  int64_t macs = 0;
  int64_t compute_cycles = 0;  // systolic occupancy (conv/fc only)
  int64_t memory_cycles = 0;
  int64_t wall_cycles = 0;
  int64_t dram_bytes = 0;
  double utilization = 0.0;  // conv/fc occupancy over compute cycles
};

struct SimReport {
  std::string network;
  ExecConfig config{};
  std::string memory;
  int64_t mini_batch = 0;

  TrafficLedger dram;
  int64_t gbuf_bytes = 0;
  int64_t lbuf_bytes = 0;
  int64_t total_macs = 0;

  int64_t compute_cycles = 0;  // conv/fc systolic cycles
  int64_t memory_cycles = 0;
  int64_t wall_cycles = 0;
  double seconds = 0.0;
  double utilization_convfc = 0.0;  // useful MACs / (PEs * conv compute cycles)

  EnergyBreakdown energy;
  std::vector<LayerTiming> fwd_layers;
  std::vector<LayerTiming> bwd_layers;
  MbsSchedule schedule;
};

// Executes one training step of the schedule on the modeled accelerator.
// Deterministic; throws on infeasible schedules or exceeded DRAM capacity.
SimReport simulate(const NetworkGraph& net, const MbsSchedule& schedule,
                   const AcceleratorConfig& accel, const MemoryConfig& mem,
                   const EnergyModel& energy);

// Builds the schedule for `config` and simulates it.
SimReport simulate_config(const NetworkGraph& net, const AcceleratorConfig& accel,
                          const MemoryConfig& mem, const EnergyModel& energy, int64_t mini_batch,
                          ExecConfig config);

// All six Table-style configurations in order:
// Baseline, ArchOpt, IL, MBS-FS, MBS1, MBS2.
std::vector<SimReport> compare_configs(const NetworkGraph& net, const AcceleratorConfig& accel,
                                       const MemoryConfig& mem, const EnergyModel& energy,
                                       int64_t mini_batch);

struct BufferSweepRow {
  int64_t buffer_bytes = 0;
  SimReport report;
};
std::vector<BufferSweepRow> sweep_buffer(const NetworkGraph& net, AcceleratorConfig accel,
                                         const MemoryConfig& mem, const EnergyModel& energy,
                                         int64_t mini_batch, ExecConfig config,
                                         const std::vector<int64_t>& sizes);

std::vector<SimReport> sweep_memory(const NetworkGraph& net, const AcceleratorConfig& accel,
                                    const EnergyModel& energy, int64_t mini_batch,
                                    ExecConfig config, const std::vector<MemoryConfig>& mems);

// E = (1-zero)*macs*e_mac + dram*e_dram + gbuf*e_gbuf + lbuf*e_lbuf + P*t.
EnergyBreakdown energy_report(const SimReport& r, const EnergyModel& e);

}  // namespace wavesim
