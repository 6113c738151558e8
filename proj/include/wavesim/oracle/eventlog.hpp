#pragma once

#include <string>

#include "wavesim/traffic.hpp"

namespace wavesim::oracle {

// Replays a traffic event log and cross-checks it against the ledger:
//   - DRAM and global-buffer event bytes sum exactly to the report totals.
//   - No tensor is read from DRAM without a write (network inputs, loss-side
//     gradients and backward checkpoint reads of forward writes excepted).
//   - Feature tensors are never written twice.
//   - Weight-gradient partials are read strictly less than written (the
//     first iteration has nothing to re-read).
// Throws Error with the offending tensor named.
void verify_event_log(const NetworkGraph& net, const TrafficReport& report);

// Stricter check for fan-out-free schedules: every non-checkpoint feature
// byte written to DRAM is read exactly once downstream.
void verify_boundary_conservation(const NetworkGraph& net, const TrafficReport& report);

}  // namespace wavesim::oracle
