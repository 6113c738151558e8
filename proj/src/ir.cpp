#include "wavesim/ir.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace wavesim {

void Precision::validate() const {
  if (feature_bits < 1 || weight_bits < 1 || accum_bits < 1)
    throw Error("precision: bit widths must be >= 1");
  if (accum_bits < feature_bits)
    throw Error("precision: accum_bits must be >= feature_bits");
  if (relu_grad_bits != 1 && relu_grad_bits != feature_bits)
    throw Error("precision: relu_grad_bits must be 1 or feature_bits");
}

const char* to_string(LayerKind k) {
  switch (k) {
    case LayerKind::Conv: return "conv";
    case LayerKind::FullyConnected: return "fc";
    case LayerKind::Pool: return "pool";
    case LayerKind::Norm: return "norm";
    case LayerKind::Activation: return "act";
    case LayerKind::ElementwiseAdd: return "add";
    case LayerKind::Concat: return "concat";
  }
  return "?";
}

NetworkGraph::NetworkGraph(std::string name, TensorShape input, std::vector<LayerNode> layers,
                           std::vector<BlockNode> blocks)
    : name_(std::move(name)), input_(input), layers_(std::move(layers)), blocks_(std::move(blocks)) {
  infer_and_validate();
}

const LayerNode& NetworkGraph::layer(int id) const {
  if (id < 0 || id >= static_cast<int>(layers_.size()))
    throw Error("layer id out of range: " + std::to_string(id));
  return layers_[static_cast<size_t>(id)];
}

const LayerNode* NetworkGraph::find(const std::string& name) const {
  for (const auto& l : layers_)
    if (l.name == name) return &l;
  return nullptr;
}

TensorShape NetworkGraph::producer_shape(int id) const {
  if (id == kInputId) return input_;
  return layer(id).out_shape;
}

static TensorShape conv_out_shape(const ConvSpec& c, const TensorShape& in, const std::string& name) {
  if (c.r < 1 || c.s < 1 || c.stride < 1 || c.pad_h < 0 || c.pad_w < 0)
    throw Error(name + ": bad conv geometry");
  if (in.c != c.c_in)
    throw Error(name + ": input channels " + std::to_string(in.c) + " != c_in " +
                std::to_string(c.c_in));
  int64_t ho = (in.h + 2 * c.pad_h - c.r) / c.stride + 1;
  int64_t wo = (in.w + 2 * c.pad_w - c.s) / c.stride + 1;
  if (ho < 1 || wo < 1) throw Error(name + ": conv output collapses to zero");
  return {1, c.c_out, ho, wo};
}

void NetworkGraph::infer_layer(LayerNode& l) {
  l.in_shapes.clear();
  for (int src : l.inputs) l.in_shapes.push_back(producer_shape(src));
  if (l.in_shapes.empty()) throw Error(l.name + ": layer has no inputs");
  const TensorShape& in = l.in_shapes.front();

  switch (l.kind) {
    case LayerKind::Conv:
      if (l.conv.c_in == 0) l.conv.c_in = in.c;  // late-bound from the producer
      l.out_shape = conv_out_shape(l.conv, in, l.name);
      break;
    case LayerKind::FullyConnected: {
      // FC flattens its input and behaves as a 1x1 conv on a 1x1 feature.
      l.conv.c_in = in.c * in.h * in.w;
      l.conv.r = l.conv.s = 1;
      l.conv.stride = 1;
      l.conv.pad_h = l.conv.pad_w = 0;
      l.out_shape = {1, l.conv.c_out, 1, 1};
      break;
    }
    case LayerKind::Pool: {
      if (l.pool.global) {
        l.out_shape = {1, in.c, 1, 1};
      } else {
        int64_t ho = (in.h + 2 * l.pool.pad - l.pool.r) / l.pool.stride + 1;
        int64_t wo = (in.w + 2 * l.pool.pad - l.pool.s) / l.pool.stride + 1;
        if (ho < 1 || wo < 1) throw Error(l.name + ": pool output collapses to zero");
        l.out_shape = {1, in.c, ho, wo};
      }
      break;
    }
    case LayerKind::Norm:
      if (l.norm.kind == NormKind::GroupNorm &&
          (l.norm.groups < 1 || in.c % l.norm.groups != 0))
        throw Error(l.name + ": group count must divide channels");
      l.out_shape = in;
      break;
    case LayerKind::Activation:
      l.out_shape = in;
      break;
    case LayerKind::ElementwiseAdd: {
      if (l.in_shapes.size() < 2) throw Error(l.name + ": add needs >= 2 inputs");
      for (size_t i = 1; i < l.in_shapes.size(); ++i) {
        if (!(l.in_shapes[i] == in)) {
          throw Error(l.name + ": shape mismatch between producers '" +
                      layer(l.inputs[0]).name + "' and '" + layer(l.inputs[i]).name + "'");
        }
      }
      l.out_shape = in;
      break;
    }
    case LayerKind::Concat: {
      if (l.in_shapes.size() < 2) throw Error(l.name + ": concat needs >= 2 inputs");
      int64_t c = 0;
      for (size_t i = 0; i < l.in_shapes.size(); ++i) {
        const auto& s = l.in_shapes[i];
        if (s.h != in.h || s.w != in.w)
          throw Error(l.name + ": concat inputs disagree on spatial dims ('" +
                      layer(l.inputs[i]).name + "')");
        c += s.c;
      }
      l.out_shape = {1, c, in.h, in.w};
      break;
    }
  }
  if (l.out_shape.n != 1) throw Error(l.name + ": per-sample shapes must have n == 1");
}

void NetworkGraph::build_order() {
  order_.clear();
  units_.clear();
  const int n = static_cast<int>(layers_.size());

  // Blocks expand as: branch 0 layers, branch 1 layers, ..., merge.
  std::vector<bool> in_block(static_cast<size_t>(n), false);
  for (const auto& b : blocks_) {
    for (const auto& br : b.branches)
      for (int id : br) in_block[static_cast<size_t>(id)] = true;
    in_block[static_cast<size_t>(b.merge_layer)] = true;
  }

  std::vector<bool> emitted(static_cast<size_t>(n), false);
  auto emit = [&](int id) {
    const LayerNode& l = layers_[static_cast<size_t>(id)];
    for (int src : l.inputs)
      if (src != kInputId && !emitted[static_cast<size_t>(src)])
        throw Error(l.name + ": consumes '" + layers_[static_cast<size_t>(src)].name +
                    "' before it is produced (cycle or bad ordering)");
    order_.push_back(id);
    emitted[static_cast<size_t>(id)] = true;
  };

  size_t next_block = 0;
  for (int id = 0; id < n; ++id) {
    if (emitted[static_cast<size_t>(id)]) continue;
    if (!in_block[static_cast<size_t>(id)]) {
      emit(id);
      units_.push_back({false, id});
      continue;
    }
    // First unemitted layer of a block: emit the whole block.
    if (next_block >= blocks_.size()) throw Error("block bookkeeping out of sync");
    const BlockNode& b = blocks_[next_block];
    for (const auto& br : b.branches)
      for (int lid : br) emit(lid);
    emit(b.merge_layer);
    units_.push_back({true, static_cast<int>(next_block)});
    ++next_block;
  }
}

void NetworkGraph::infer_and_validate() {
  for (size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].id != static_cast<int>(i)) throw Error("layer ids must be dense and ordered");
    for (int src : layers_[i].inputs) {
      if (src != kInputId && (src < 0 || src >= static_cast<int>(i)))
        throw Error(layers_[i].name + ": input reference out of order (cycle detected)");
    }
    infer_layer(layers_[i]);
  }

  for (size_t bi = 0; bi < blocks_.size(); ++bi) {
    const BlockNode& b = blocks_[bi];
    if (b.kind == BlockKind::Residual && b.branches.size() != 2)
      throw Error(b.name + ": residual blocks have exactly 2 branches");
    if (b.kind == BlockKind::Inception && b.branches.size() < 2)
      throw Error(b.name + ": inception blocks need >= 2 branches");
    const LayerNode& merge = layer(b.merge_layer);
    if ((b.merge == MergeOp::Add) != (merge.kind == LayerKind::ElementwiseAdd))
      throw Error(b.name + ": merge op does not match merge layer kind");
    for (const auto& br : b.branches) {
      if (br.empty()) continue;
      const LayerNode& first = layer(br.front());
      bool feeds_from_split = std::find(first.inputs.begin(), first.inputs.end(),
                                        b.split_input) != first.inputs.end();
      if (!feeds_from_split)
        throw Error(b.name + ": branch head '" + first.name + "' does not consume the block input");
    }
    for (const auto& br : b.branches)
      for (int lid : br)
        if (layer(lid).block != static_cast<int>(bi))
          throw Error(b.name + ": member '" + layer(lid).name + "' not tagged with block index");
  }

  build_order();
}

bool output_checkpointed(const NetworkGraph& net, int layer_id) {
  for (const auto& l : net.layers()) {
    if (!l.is_gemm() && l.kind != LayerKind::Norm) continue;
    for (int src : l.inputs)
      if (src == layer_id) return true;
  }
  return false;
}

DataSizes layer_data_sizes(const NetworkGraph& net, int layer_id, int64_t samples,
                           const Precision& p) {
  const LayerNode& l = net.layer(layer_id);
  DataSizes d;
  int64_t in_elems = 0;
  for (const auto& s : l.in_shapes) in_elems += s.elems();
  d.input_bytes = bits_to_bytes(in_elems * samples, p.feature_bits);
  d.output_bytes = bits_to_bytes(l.out_shape.elems() * samples, p.feature_bits);
  if (l.is_gemm())
    d.weight_bytes = bits_to_bytes(l.conv.weight_elems(), p.weight_bits) +
                     (l.conv.bias ? bits_to_bytes(l.conv.c_out, p.weight_bits) : 0);
  if (output_checkpointed(net, layer_id))
    d.checkpoint_bytes += d.output_bytes;
  if (l.kind == LayerKind::Activation)
    d.checkpoint_bytes += bits_to_bytes(l.out_shape.elems() * samples, p.relu_grad_bits);
  return d;
}

int64_t conv_macs(const LayerNode& l, int64_t samples) {
  if (!l.is_gemm()) throw Error(l.name + ": conv_macs requires a conv or fc layer");
  const TensorShape& o = l.out_shape;
  return samples * o.h * o.w * l.conv.r * l.conv.s * l.conv.c_in * l.conv.c_out;
}

}  // namespace wavesim
