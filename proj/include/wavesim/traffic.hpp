#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wavesim/schedule.hpp"

namespace wavesim {

// DRAM byte counters by category. features_in / features_out cover inter-layer
// tensors of both phases (gradients included); checkpoints are the forward
// tensors stashed solely for backward reuse.
struct TrafficLedger {
  int64_t features_in = 0;
  int64_t features_out = 0;
  int64_t weights = 0;
  int64_t weight_grad_rw = 0;
  int64_t checkpoints_fwd_write = 0;
  int64_t checkpoints_bwd_read = 0;
  int64_t relu_grad_bits = 0;
  int64_t norm_params = 0;

  int64_t total() const {
    return features_in + features_out + weights + weight_grad_rw + checkpoints_fwd_write +
           checkpoints_bwd_read + relu_grad_bits + norm_params;
  }
  TrafficLedger& operator+=(const TrafficLedger& o);
};

enum class Phase { Forward, Backward };

struct TrafficEvent {
  Phase phase{};
  std::string tensor;
  bool is_write = false;
  bool dram = true;  // false = global buffer
  int64_t bytes = 0;
  int layer = -1;  // attributed layer
};

// Per-layer traffic split used for timing (memory cycles) and reports.
struct LayerTraffic {
  int layer = -1;
  TrafficLedger fwd_dram;
  TrafficLedger bwd_dram;
  int64_t fwd_gbuf = 0;
  int64_t bwd_gbuf = 0;
  int64_t fwd_vector_bytes = 0;  // logical reads+writes of vector layers
  int64_t bwd_vector_bytes = 0;
};

struct TrafficReport {
  TrafficLedger totals;
  int64_t gbuf_bytes = 0;
  std::vector<LayerTraffic> per_layer;
  std::vector<TrafficEvent> events;  // filled only when requested
};

// Computes the full DRAM/global-buffer traffic of one training step under a
// schedule. The same accounting backs both the scheduler's greedy objective
// and the simulator's ledger.
TrafficReport compute_traffic(const NetworkGraph& net, const MbsSchedule& s,
                              const ScheduleParams& sp, bool with_events = false);

// Convenience: total DRAM bytes of a candidate schedule (greedy objective).
int64_t schedule_dram_traffic(const NetworkGraph& net, const MbsSchedule& s,
                              const ScheduleParams& sp);

}  // namespace wavesim
