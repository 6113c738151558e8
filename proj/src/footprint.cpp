#include "wavesim/footprint.hpp"

#include <algorithm>

namespace wavesim {

namespace {

int64_t feat_bytes(const TensorShape& s, const Precision& p) { return s.bytes(p.feature_bits); }

int64_t inputs_bytes(const NetworkGraph& net, const LayerNode& l, const Precision& p) {
  int64_t sum = 0;
  for (int src : l.inputs) sum += feat_bytes(net.producer_shape(src), p);
  return sum;
}

}  // namespace

int64_t plain_layer_footprint(const NetworkGraph& net, int layer_id, const Precision& p) {
  const LayerNode& l = net.layer(layer_id);
  switch (l.kind) {
    case LayerKind::ElementwiseAdd:
      return inputs_bytes(net, l, p);  // accumulates in place
    case LayerKind::Concat:
      return feat_bytes(l.out_shape, p);  // slices are the output region
    default:
      return inputs_bytes(net, l, p) + feat_bytes(l.out_shape, p);
  }
}

int64_t residual_block_footprint(const NetworkGraph& net, const BlockNode& b, const Precision& p) {
  if (b.kind != BlockKind::Residual) throw Error(b.name + ": not a residual block");
  const int64_t block_in = feat_bytes(net.producer_shape(b.split_input), p);
  const int64_t block_out = feat_bytes(net.layer(b.merge_layer).out_shape, p);

  int64_t best = 0;
  auto consider = [&](int64_t v) { best = std::max(best, v); };

  // Main branch: the block input stays live past the head because the
  // shortcut still needs it.
  const auto& main = b.branches.at(0);
  for (size_t li = 0; li < main.size(); ++li) {
    const LayerNode& l = net.layer(main[li]);
    int64_t v = inputs_bytes(net, l, p) + feat_bytes(l.out_shape, p);
    bool reads_split = std::find(l.inputs.begin(), l.inputs.end(), b.split_input) != l.inputs.end();
    if (li != 0 && !reads_split) v += block_in;
    consider(v);
  }

  // Shortcut branch: the main path's merged-size output stays live while the
  // shortcut executes. An empty branch is the identity position.
  const auto& shortcut = b.branches.at(1);
  if (shortcut.empty()) {
    consider(block_in + block_out + block_out);
  } else {
    for (int lid : shortcut) {
      const LayerNode& l = net.layer(lid);
      consider(inputs_bytes(net, l, p) + feat_bytes(l.out_shape, p) + block_out);
    }
  }
  return best;
}

int64_t inception_block_footprint(const NetworkGraph& net, const BlockNode& b, const Precision& p) {
  if (b.kind != BlockKind::Inception) throw Error(b.name + ": not an inception block");
  const int64_t block_in = feat_bytes(net.producer_shape(b.split_input), p);
  const int64_t block_out = feat_bytes(net.layer(b.merge_layer).out_shape, p);

  size_t depth = 1;
  for (const auto& br : b.branches) depth = std::max(depth, std::max<size_t>(br.size(), 1));

  int64_t best = 0;
  for (const auto& br : b.branches) {
    if (br.empty()) {
      // Identity branch: one position at depth 1 passing the block input
      // through to its slice of the output.
      int64_t v = block_in + block_in;
      if (depth != 1) v += block_out;
      best = std::max(best, v);
      continue;
    }
    for (size_t li = 0; li < br.size(); ++li) {
      const LayerNode& l = net.layer(br[li]);
      int64_t v = inputs_bytes(net, l, p) + feat_bytes(l.out_shape, p);
      bool reads_split =
          std::find(l.inputs.begin(), l.inputs.end(), b.split_input) != l.inputs.end();
      if (li != 0 && !reads_split) v += block_in;
      if (li + 1 != depth) v += block_out;
      best = std::max(best, v);
    }
  }
  return best;
}

int64_t unit_footprint(const NetworkGraph& net, const Unit& u, FootprintMode mode,
                       const Precision& p) {
  if (!u.is_block) return plain_layer_footprint(net, u.index, p);
  const BlockNode& b = net.blocks().at(static_cast<size_t>(u.index));
  if (mode == FootprintMode::BlockReuse) {
    return b.kind == BlockKind::Residual ? residual_block_footprint(net, b, p)
                                         : inception_block_footprint(net, b, p);
  }
  int64_t best = 0;
  for (const auto& br : b.branches)
    for (int lid : br) best = std::max(best, plain_layer_footprint(net, lid, p));
  best = std::max(best, plain_layer_footprint(net, b.merge_layer, p));
  return best;
}

int64_t max_subbatch(int64_t footprint_per_sample, int64_t buffer_bytes) {
  if (footprint_per_sample <= 0) throw Error("footprint must be positive");
  return std::max<int64_t>(buffer_bytes / footprint_per_sample, 0);
}

}  // namespace wavesim
