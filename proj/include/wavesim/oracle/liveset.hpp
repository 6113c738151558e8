#pragma once

#include <vector>

#include "wavesim/ir.hpp"

namespace wavesim::oracle {

// Brute-force peak-resident-bytes replay of one multi-branch block at a given
// sub-batch size, walking the block's execution events with explicit tensor
// sets. Residual blocks follow reference counting (a tensor dies right after
// its last in-block consumer; the merge accumulates in place). Inception
// blocks follow the block buffer policy the footprint provisioning assumes:
// the block input is held past branch heads and the concatenated output
// region is held at every position short of the final depth.
int64_t replay_block_live_set(const NetworkGraph& net, const BlockNode& b, int64_t sub_batch,
                              const Precision& p);

// Peak over a plain chain: each event holds the layer's inputs and output.
int64_t replay_plain_live_set(const NetworkGraph& net, const std::vector<int>& layer_ids,
                              int64_t sub_batch, const Precision& p);

}  // namespace wavesim::oracle
