#pragma once

#include "wavesim/ir.hpp"

namespace wavesim {

// How a schedulable unit's on-chip space demand is computed.
// PlainLayer: every layer holds only its own inputs and output; multi-branch
// blocks get no inter-branch provisioning (their shared tensors round-trip
// DRAM instead). BlockReuse: residual/inception blocks are provisioned so
// that block inputs and merge outputs stay on chip across branches.
enum class FootprintMode { PlainLayer, BlockReuse };

// Per-sample bytes a single layer needs while executing: sum of its live
// inputs plus its output. Elementwise adds run in place (inputs only) and
// concats are address-level (output region only).
int64_t plain_layer_footprint(const NetworkGraph& net, int layer_id, const Precision& p);

// Per-sample space for a residual block with inter-branch reuse: the max over
// branch positions of in + out + conditional terms (block input held while
// the main branch runs past its head; merged output held while the shortcut
// runs). Branch 0 is the main path, branch 1 the shortcut (may be empty).
int64_t residual_block_footprint(const NetworkGraph& net, const BlockNode& b, const Precision& p);

// Per-sample space for an inception block with inter-branch reuse: max over
// branch positions of in + out, plus the block input when not at a branch
// head and the concatenated output region when not at the final depth.
int64_t inception_block_footprint(const NetworkGraph& net, const BlockNode& b, const Precision& p);

// Footprint of a schedulable unit under the given mode.
int64_t unit_footprint(const NetworkGraph& net, const Unit& u, FootprintMode mode,
                       const Precision& p);

// Samples per iteration a buffer allows: floor(buffer / footprint).
// Zero means the unit does not fit at all.
int64_t max_subbatch(int64_t footprint_per_sample, int64_t buffer_bytes);

}  // namespace wavesim
