#include "wavesim/oracle/liveset.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace wavesim::oracle {

namespace {

int64_t tensor_bytes(const NetworkGraph& net, int producer, int64_t sub_batch,
                     const Precision& p) {
  TensorShape s = net.producer_shape(producer);
  return bits_to_bytes(s.elems() * sub_batch, p.feature_bits);
}

// Tensor keys: layer id for layer outputs, plus synthetic keys for the block
// input copy and the concat output region.
constexpr int kShortcutCopy = -2;
constexpr int kOutputRegion = -3;

int64_t replay_residual(const NetworkGraph& net, const BlockNode& b, int64_t sub_batch,
                        const Precision& p) {
  const auto& main = b.branches.at(0);
  const auto& shortcut = b.branches.at(1);
  if (main.empty()) throw Error(b.name + ": residual main branch is empty");

  // Event list: main layers, shortcut layers (identity modeled as a copy
  // event), then the in-place merge.
  struct Event {
    std::vector<int> reads;
    int writes;  // tensor key, or kInputId for the in-place merge
  };
  std::vector<Event> events;
  for (int lid : main) events.push_back({net.layer(lid).inputs, lid});
  if (shortcut.empty()) {
    events.push_back({{b.split_input}, kShortcutCopy});
  } else {
    for (int lid : shortcut) events.push_back({net.layer(lid).inputs, lid});
  }
  std::vector<int> merge_reads;
  for (int src : net.layer(b.merge_layer).inputs)
    merge_reads.push_back(src == b.split_input && shortcut.empty() ? kShortcutCopy : src);
  events.push_back({merge_reads, kInputId});

  auto key_bytes = [&](int key) {
    if (key == kShortcutCopy) return tensor_bytes(net, b.split_input, sub_batch, p);
    return tensor_bytes(net, key, sub_batch, p);
  };

  // Remaining-consumer counts for every tensor read by some event.
  std::map<int, int> pending;
  for (const Event& e : events)
    for (int t : e.reads) pending[t]++;

  std::map<int, int64_t> resident;
  resident[b.split_input] = key_bytes(b.split_input);

  int64_t peak = 0;
  for (const Event& e : events) {
    for (int t : e.reads)
      if (!resident.count(t)) throw Error(b.name + ": replay reads a dead tensor");
    if (e.writes != kInputId) resident[e.writes] = key_bytes(e.writes);
    int64_t live = 0;
    for (const auto& [t, bytes] : resident) live += bytes;
    peak = std::max(peak, live);
    for (int t : e.reads) {
      if (--pending[t] == 0) resident.erase(t);
    }
  }
  return peak;
}

int64_t replay_inception(const NetworkGraph& net, const BlockNode& b, int64_t sub_batch,
                         const Precision& p) {
  const int64_t region = tensor_bytes(net, b.merge_layer, sub_batch, p);
  size_t depth = 1;
  for (const auto& br : b.branches) depth = std::max(depth, std::max<size_t>(br.size(), 1));

  int64_t peak = 0;
  for (const auto& br : b.branches) {
    size_t len = std::max<size_t>(br.size(), 1);
    for (size_t li = 0; li < len; ++li) {
      std::map<int, int64_t> live;  // tensor key -> bytes
      if (br.empty()) {
        live[b.split_input] = tensor_bytes(net, b.split_input, sub_batch, p);
        live[kShortcutCopy] = tensor_bytes(net, b.split_input, sub_batch, p);
      } else {
        const LayerNode& l = net.layer(br[li]);
        for (int src : l.inputs) live[src] = tensor_bytes(net, src, sub_batch, p);
        live[l.id] = tensor_bytes(net, l.id, sub_batch, p);
        if (li != 0) live.emplace(b.split_input, tensor_bytes(net, b.split_input, sub_batch, p));
      }
      if (li + 1 != depth) live[kOutputRegion] = region;
      int64_t total = 0;
      for (const auto& [t, bytes] : live) total += bytes;
      peak = std::max(peak, total);
    }
  }
  return peak;
}

}  // namespace

int64_t replay_block_live_set(const NetworkGraph& net, const BlockNode& b, int64_t sub_batch,
                              const Precision& p) {
  return b.kind == BlockKind::Residual ? replay_residual(net, b, sub_batch, p)
                                       : replay_inception(net, b, sub_batch, p);
}

int64_t replay_plain_live_set(const NetworkGraph& net, const std::vector<int>& layer_ids,
                              int64_t sub_batch, const Precision& p) {
  int64_t peak = 0;
  for (int lid : layer_ids) {
    const LayerNode& l = net.layer(lid);
    std::map<int, int64_t> live;
    for (int src : l.inputs) live[src] = tensor_bytes(net, src, sub_batch, p);
    if (l.kind != LayerKind::ElementwiseAdd)  // add accumulates in place
      live[l.id] = tensor_bytes(net, l.id, sub_batch, p);
    if (l.kind == LayerKind::Concat) {
      live.clear();
      live[l.id] = tensor_bytes(net, l.id, sub_batch, p);
    }
    int64_t total = 0;
    for (const auto& [t, bytes] : live) total += bytes;
    peak = std::max(peak, total);
  }
  return peak;
}

}  // namespace wavesim::oracle
