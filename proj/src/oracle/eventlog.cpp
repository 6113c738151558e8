#include "wavesim/oracle/eventlog.hpp"

#include <map>

namespace wavesim::oracle {

namespace {

struct Tally {
  int64_t dram_w = 0, dram_r = 0;
};

std::map<std::string, Tally> tally(const TrafficReport& report) {
  std::map<std::string, Tally> t;
  for (const TrafficEvent& e : report.events) {
    if (!e.dram) continue;
    if (e.is_write)
      t[e.tensor].dram_w += e.bytes;
    else
      t[e.tensor].dram_r += e.bytes;
  }
  return t;
}

}  // namespace

void verify_event_log(const NetworkGraph& net, const TrafficReport& report) {
  int64_t dram_sum = 0, gbuf_sum = 0;
  for (const TrafficEvent& e : report.events) (e.dram ? dram_sum : gbuf_sum) += e.bytes;
  if (dram_sum != report.totals.total())
    throw Error("event log DRAM bytes " + std::to_string(dram_sum) + " != ledger total " +
                std::to_string(report.totals.total()));
  if (gbuf_sum != report.gbuf_bytes)
    throw Error("event log gbuf bytes disagree with the ledger");

  for (const auto& [tensor, t] : tally(report)) {
    // Network inputs, model parameters and backward reads of forward-written
    // checkpoints are sourced outside the per-step log.
    bool external = tensor == "input" || tensor.rfind("w:", 0) == 0 ||
                    tensor.rfind("p:", 0) == 0 || tensor.rfind("x:", 0) == 0 ||
                    tensor.rfind("z:", 0) == 0;
    if (external) continue;
    char kind = tensor[0];
    if (kind == 'g') {
      // Loss-side gradient of the network output has no modeled writer.
      const LayerNode* l = net.find(tensor.substr(2));
      bool is_output = true;
      if (l) {
        for (const auto& other : net.layers())
          for (int src : other.inputs)
            if (src == l->id) is_output = false;
      }
      if (!is_output && t.dram_r > 0 && t.dram_w == 0)
        throw Error("gradient read without a write: " + tensor);
      continue;
    }
    if (t.dram_r > 0 && t.dram_w == 0)
      throw Error("tensor read from DRAM without a write: " + tensor);
    if (kind == 'w' && tensor.rfind("wg:", 0) == 0) {
      if (t.dram_w > 0 && t.dram_r >= t.dram_w)
        throw Error("gradient partials re-read too often: " + tensor);
    }
  }
}

void verify_boundary_conservation(const NetworkGraph& net, const TrafficReport& report) {
  verify_event_log(net, report);
  // Feature tensors ("t:") written once must be consumed exactly once when no
  // layer output fans out.
  for (const auto& l : net.layers()) {
    int fan = 0;
    for (const auto& c : net.layers())
      for (int src : c.inputs)
        if (src == l.id) ++fan;
    if (fan > 1) throw Error("net has fan-out; strict conservation check not applicable");
  }
  for (const auto& [tensor, t] : tally(report)) {
    if (tensor.rfind("t:", 0) != 0) continue;
    const LayerNode* l = net.find(tensor.substr(2));
    if (!l) continue;
    // Checkpointed tensors (and activation outputs, which some configurations
    // re-read instead of storing masks) legitimately see extra backward reads.
    if (output_checkpointed(net, l->id) || l->kind == LayerKind::Activation) continue;
    bool is_output = true;
    for (const auto& other : net.layers())
      for (int src : other.inputs)
        if (src == l->id) is_output = false;
    if (is_output) continue;  // final output write has no modeled reader
    if (t.dram_w != t.dram_r)
      throw Error("boundary bytes not conserved for " + tensor + ": wrote " +
                  std::to_string(t.dram_w) + ", read " + std::to_string(t.dram_r));
  }
}

}  // namespace wavesim::oracle
