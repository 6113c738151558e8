#pragma once

#include <string>
#include <vector>

#include "wavesim/footprint.hpp"
#include "wavesim/gemm.hpp"
#include "wavesim/ir.hpp"

namespace wavesim {

// The six execution configurations compared by the toolkit.
//   Baseline: ideal per-layer GEMM blocking, gapped waves, no inter-layer reuse
//   ArchOpt:  Baseline + weight double buffering (same traffic)
//   IL:       ArchOpt + inter-layer reuse when a full mini-batch footprint fits
//   MbsFS:    one sub-batch size for the whole network (full serialization)
//   Mbs1:     greedy layer groups, per-layer footprints (no inter-branch reuse)
//   Mbs2:     Mbs1 + inter-branch reuse via block footprint provisioning
enum class ExecConfig { Baseline, ArchOpt, IL, MbsFS, Mbs1, Mbs2 };

const char* to_string(ExecConfig c);
ExecConfig exec_config_from_string(const std::string& s);
bool uses_groups(ExecConfig c);        // MbsFS / Mbs1 / Mbs2
bool uses_relu_masks(ExecConfig c);    // single-bit activation gradients
WaveMode wave_mode(ExecConfig c);      // Baseline is gapped, everything else DB
FootprintMode footprint_mode(ExecConfig c);

struct LayerGroup {
  std::vector<Unit> members;           // contiguous in topological order
  int64_t sub_batch = 1;
  int64_t iterations = 1;              // ceil(mini_batch / sub_batch)
  int64_t footprint_per_sample = 0;    // max member footprint in the schedule's mode
  int64_t buffer_budget = 0;
};

struct MbsSchedule {
  ExecConfig config{};
  int64_t mini_batch = 0;
  std::vector<LayerGroup> groups;

  int group_of_layer(const NetworkGraph& net, int layer_id) const;
  int64_t total_iterations() const;
};

struct ScheduleParams {
  int64_t buffer_bytes = 10 * 1024 * 1024;  // global buffer
  int64_t reserve_bytes = 64 * 1024;        // held back for norm params and control
  Precision precision;
  int64_t budget() const { return buffer_bytes - reserve_bytes; }
};

// Builds the schedule for one configuration. Baseline/ArchOpt/IL get one
// group per unit at the full mini-batch; MbsFS a single serialized group;
// Mbs1/Mbs2 equal-iteration runs refined by greedy merging (each accepted
// merge strictly lowers modeled DRAM traffic).
MbsSchedule build_schedule(const NetworkGraph& net, const ScheduleParams& sp, int64_t mini_batch,
                           ExecConfig config);

// Machine-readable schedule listing (one line per group), and its parser.
std::string export_schedule(const NetworkGraph& net, const MbsSchedule& s);
MbsSchedule import_schedule(const NetworkGraph& net, const std::string& text);

}  // namespace wavesim
