#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace wavesim {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bit widths used for sizing tensors and weights. relu_grad_bits covers the
// stored activation-gradient masks; configs that re-read full activations
// instead set it to feature_bits.
struct Precision {
  int feature_bits = 16;
  int weight_bits = 16;
  int accum_bits = 32;
  int relu_grad_bits = 1;
  void validate() const;
};

inline int64_t bits_to_bytes(int64_t elems, int bits) {
  return (elems * bits + 7) / 8;
}

struct TensorShape {
  int64_t n = 1, c = 1, h = 1, w = 1;
  int64_t elems() const { return n * c * h * w; }
  int64_t bytes(int bits) const { return bits_to_bytes(elems(), bits); }
  bool operator==(const TensorShape&) const = default;
};

enum class LayerKind { Conv, FullyConnected, Pool, Norm, Activation, ElementwiseAdd, Concat };
enum class PoolKind { Max, Avg };
enum class NormKind { GroupNorm, BatchNorm };

const char* to_string(LayerKind k);

struct ConvSpec {
  int64_t c_in = 0, c_out = 0;
  int64_t r = 1, s = 1;          // filter height / width
  int64_t stride = 1;
  int64_t pad_h = 0, pad_w = 0;
  bool bias = false;
  int64_t weight_elems() const { return c_in * c_out * r * s; }
};

struct PoolSpec {
  PoolKind kind = PoolKind::Max;
  int64_t r = 1, s = 1, stride = 1, pad = 0;
  bool global = false;  // output is 1x1 regardless of kernel fields
};

struct NormSpec {
  NormKind kind = NormKind::GroupNorm;
  int64_t groups = 32;
};

constexpr int kInputId = -1;  // producer id of the network input

struct LayerNode {
  int id = -1;
  std::string name;
  LayerKind kind{};
  ConvSpec conv;
  PoolSpec pool;
  NormSpec norm;
  std::vector<int> inputs;             // producer layer ids (kInputId allowed)
  std::vector<TensorShape> in_shapes;  // per-sample, one per input
  TensorShape out_shape;               // per-sample (n == 1)
  int block = -1;                      // index into blocks(), -1 for top level

  bool is_gemm() const { return kind == LayerKind::Conv || kind == LayerKind::FullyConnected; }
};

enum class BlockKind { Residual, Inception };
enum class MergeOp { Add, Concat };

// A multi-branch block. Branch layer lists are in execution order; an empty
// branch is an identity path (residual shortcut). The merge layer consumes
// every branch's terminal outputs.
struct BlockNode {
  BlockKind kind{};
  std::string name;
  int split_input = kInputId;  // layer whose output feeds every branch
  std::vector<std::vector<int>> branches;
  MergeOp merge{};
  int merge_layer = -1;
};

// One schedulable unit: a plain top-level layer or a whole block.
struct Unit {
  bool is_block = false;
  int index = -1;  // layer id or block index
};

class NetworkGraph {
 public:
  NetworkGraph() = default;
  NetworkGraph(std::string name, TensorShape input, std::vector<LayerNode> layers,
               std::vector<BlockNode> blocks);

  const std::string& name() const { return name_; }
  const TensorShape& input_shape() const { return input_; }
  const std::vector<LayerNode>& layers() const { return layers_; }
  const std::vector<BlockNode>& blocks() const { return blocks_; }
  const LayerNode& layer(int id) const;
  const LayerNode* find(const std::string& name) const;

  // Layer ids in forward execution order (blocks expanded branch by branch,
  // merge last). Also the order used to define on-chip adjacency.
  const std::vector<int>& exec_order() const { return order_; }

  // Chain of schedulable units in execution order.
  const std::vector<Unit>& units() const { return units_; }

  // Per-sample output shape of a producer id (kInputId gives the input shape).
  TensorShape producer_shape(int id) const;

  // Runs shape inference and structural validation; throws Error with the
  // offending layer named. Called by the builder; idempotent.
  void infer_and_validate();

 private:
  std::string name_;
  TensorShape input_;
  std::vector<LayerNode> layers_;
  std::vector<BlockNode> blocks_;
  std::vector<int> order_;
  std::vector<Unit> units_;

  void infer_layer(LayerNode& l);
  void build_order();
};

struct DataSizes {
  int64_t input_bytes = 0;
  int64_t output_bytes = 0;
  int64_t weight_bytes = 0;
  int64_t checkpoint_bytes = 0;
};

// Byte accounting for one layer at a given sample count. input/output scale
// with samples, weights do not. checkpoint_bytes is what forward must store
// for this layer's backward consumers (conv/fc inputs, norm inputs, and
// activation gradient masks), attributed to the producing layer.
DataSizes layer_data_sizes(const NetworkGraph& net, int layer_id, int64_t samples,
                           const Precision& p);

// Forward multiplies of a conv/fc layer: N * Ho * Wo * R * S * Ci * Co.
// Throws for non-GEMM layers.
int64_t conv_macs(const LayerNode& l, int64_t samples);

// True if this layer's output must be checkpointed to DRAM for backward:
// it feeds a conv/fc (im2col input) or a norm layer.
bool output_checkpointed(const NetworkGraph& net, int layer_id);

}  // namespace wavesim
