#pragma once

#include <string>

#include "wavesim/gemm.hpp"
#include "wavesim/schedule.hpp"

namespace wavesim {

struct AcceleratorConfig {
  ArrayConfig array;
  int64_t global_buffer_bytes = 10 * 1024 * 1024;
  int64_t reserve_bytes = 64 * 1024;
  double clock_hz = 0.7e9;
  double vector_bytes_per_cycle = 512;  // global-buffer-side vector throughput
  Precision precision;

  ScheduleParams sched_params() const {
    return {global_buffer_bytes, reserve_bytes, precision};
  }
};

struct MemoryConfig {
  std::string name = "hbm2";
  double bandwidth_bytes_per_s = 300.0 * 1073741824.0;
  int64_t capacity_bytes = 8LL * 1073741824LL;
  int channels = 8;
  double efficiency = 0.85;  // fraction of peak actually achieved
  bool unlimited = false;    // utilization studies ignore DRAM time
};

struct EnergyModel {
  double e_mac_pj = 1.2;
  double e_dram_pj_per_byte = 15.0;
  double e_gbuf_pj_per_byte = 15.0 / 8.0;  // an eighth of the DRAM cost
  double e_lbuf_pj_per_byte = 0.3;
  double p_static_w = 4.0;
  double zero_operand_fraction = 0.0;  // skippable MAC fraction, energy only
};

// key = value files with '#' comments.
AcceleratorConfig load_accelerator_file(const std::string& path);
MemoryConfig load_memory_file(const std::string& path);
EnergyModel load_energy_file(const std::string& path);

// Table 3 presets: hbm2, hbm2x2, gddr5, lpddr4.
MemoryConfig memory_preset(const std::string& name);
bool is_memory_preset(const std::string& name);

}  // namespace wavesim
