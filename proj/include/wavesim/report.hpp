#pragma once

#include <string>
#include <vector>

#include "wavesim/sim.hpp"

namespace wavesim {

// JSON summary of one or more simulation reports (stable key names).
std::string report_json(const std::vector<SimReport>& reports);

// Per-layer rows, forward and backward phases, stable column order.
std::string per_layer_csv(const NetworkGraph& net, const SimReport& r);

// One row per configuration with totals and values normalized to the
// Baseline row and to the ArchOpt row.
std::string comparison_csv(const std::vector<SimReport>& reports);

std::string buffer_sweep_csv(const std::vector<BufferSweepRow>& rows);
std::string memory_sweep_csv(const std::vector<SimReport>& reports);

void write_file(const std::string& path, const std::string& content);

}  // namespace wavesim
