#include "wavesim/traffic.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace wavesim {

TrafficLedger& TrafficLedger::operator+=(const TrafficLedger& o) {
  features_in += o.features_in;
  features_out += o.features_out;
  weights += o.weights;
  weight_grad_rw += o.weight_grad_rw;
  checkpoints_fwd_write += o.checkpoints_fwd_write;
  checkpoints_bwd_read += o.checkpoints_bwd_read;
  relu_grad_bits += o.relu_grad_bits;
  norm_params += o.norm_params;
  return *this;
}

namespace {

enum class Path { OnChip, DramGrouped, DramNaked };
enum class Cat { FeatIn, FeatOut, Weights, WGrad, CkptW, CkptR, ReluBits, NormParams };

// Accounting context for one (net, schedule) pair.
struct Ctx {
  const NetworkGraph& net;
  const MbsSchedule& s;
  const ScheduleParams& sp;
  bool with_events;
  TrafficReport out;

  std::vector<int> pos;          // exec position per layer
  std::vector<int> group;       // group index per layer
  std::vector<bool> fits;       // IL residency per layer
  int first_gemm = -1;

  Ctx(const NetworkGraph& n, const MbsSchedule& sch, const ScheduleParams& p, bool ev)
      : net(n), s(sch), sp(p), with_events(ev) {
    const auto& order = net.exec_order();
    pos.assign(net.layers().size(), -1);
    for (size_t i = 0; i < order.size(); ++i) pos[static_cast<size_t>(order[i])] = static_cast<int>(i);
    group.assign(net.layers().size(), -1);
    for (size_t gi = 0; gi < s.groups.size(); ++gi)
      for (const Unit& u : s.groups[gi].members) {
        if (!u.is_block) {
          group[static_cast<size_t>(u.index)] = static_cast<int>(gi);
        } else {
          const BlockNode& b = net.blocks()[static_cast<size_t>(u.index)];
          for (const auto& br : b.branches)
            for (int lid : br) group[static_cast<size_t>(lid)] = static_cast<int>(gi);
          group[static_cast<size_t>(b.merge_layer)] = static_cast<int>(gi);
        }
      }
    fits.assign(net.layers().size(), false);
    if (s.config == ExecConfig::IL) {
      for (const auto& l : net.layers())
        fits[static_cast<size_t>(l.id)] =
            s.mini_batch * plain_layer_footprint(net, l.id, sp.precision) <= sp.budget();
    }
    for (int id : order)
      if (net.layer(id).is_gemm()) {
        first_gemm = id;
        break;
      }
    out.per_layer.resize(net.layers().size());
    for (size_t i = 0; i < net.layers().size(); ++i) out.per_layer[i].layer = static_cast<int>(i);
  }

  int64_t iterations(int layer_id) const {
    int g = group[static_cast<size_t>(layer_id)];
    return g < 0 ? 1 : s.groups[static_cast<size_t>(g)].iterations;
  }

  int64_t feat_bytes(int producer) const {
    return bits_to_bytes(net.producer_shape(producer).elems() * s.mini_batch,
                         sp.precision.feature_bits);
  }

  // True when no real work sits between the two layers in execution order
  // (transparent merges do not count; their backward is free).
  bool merge_skip_adjacent(int p, int c) const {
    int a = pos[static_cast<size_t>(p)], b = pos[static_cast<size_t>(c)];
    if (a > b) std::swap(a, b);
    for (int i = a + 1; i < b; ++i) {
      const LayerNode& mid = net.layer(net.exec_order()[static_cast<size_t>(i)]);
      if (mid.kind != LayerKind::ElementwiseAdd && mid.kind != LayerKind::Concat) return false;
    }
    return true;
  }

  Path classify_impl(int p, int c, bool skip_merges) const {
    switch (s.config) {
      case ExecConfig::Baseline:
      case ExecConfig::ArchOpt:
        return Path::DramNaked;
      case ExecConfig::IL:
        if (p != kInputId && fits[static_cast<size_t>(p)] && fits[static_cast<size_t>(c)])
          return Path::OnChip;
        return Path::DramNaked;
      default: {
        if (p == kInputId) return Path::DramGrouped;
        int gp = group[static_cast<size_t>(p)], gc = group[static_cast<size_t>(c)];
        if (gp != gc) return Path::DramGrouped;
        if (s.config == ExecConfig::Mbs2) return Path::OnChip;
        bool adjacent = skip_merges
                            ? merge_skip_adjacent(p, c)
                            : pos[static_cast<size_t>(c)] == pos[static_cast<size_t>(p)] + 1;
        return adjacent ? Path::OnChip : Path::DramGrouped;
      }
    }
  }

  Path classify(int p, int c) const { return classify_impl(p, c, false); }
  Path classify_bwd(int p, int c) const { return classify_impl(p, c, true); }

  bool checkpointed(int layer_id) const {
    const LayerNode& l = net.layer(layer_id);
    if (output_checkpointed(net, layer_id)) return true;
    // Without stored gradient masks the activation output itself is re-read.
    if (l.kind == LayerKind::Activation && !uses_relu_masks(s.config)) return true;
    return false;
  }

  void charge(Phase ph, Cat cat, int layer, bool is_write, bool dram, int64_t bytes,
              const std::string& tensor) {
    if (bytes <= 0) return;
    LayerTraffic& lt = out.per_layer[static_cast<size_t>(layer)];
    if (dram) {
      TrafficLedger& led = ph == Phase::Forward ? lt.fwd_dram : lt.bwd_dram;
      switch (cat) {
        case Cat::FeatIn: led.features_in += bytes; break;
        case Cat::FeatOut: led.features_out += bytes; break;
        case Cat::Weights: led.weights += bytes; break;
        case Cat::WGrad: led.weight_grad_rw += bytes; break;
        case Cat::CkptW: led.checkpoints_fwd_write += bytes; break;
        case Cat::CkptR: led.checkpoints_bwd_read += bytes; break;
        case Cat::ReluBits: led.relu_grad_bits += bytes; break;
        case Cat::NormParams: led.norm_params += bytes; break;
      }
    } else {
      (ph == Phase::Forward ? lt.fwd_gbuf : lt.bwd_gbuf) += bytes;
      out.gbuf_bytes += bytes;
    }
    if (with_events)
      out.events.push_back({ph, tensor, is_write, dram, bytes, layer});
  }

  // Number of passes a consumer makes over one input tensor.
  static int64_t fwd_uses(const LayerNode& c) { return c.kind == LayerKind::Norm ? 2 : 1; }

  // Passes a layer's backward makes over its output gradient.
  int64_t bwd_uses(const LayerNode& l) const {
    switch (l.kind) {
      case LayerKind::Conv:
      case LayerKind::FullyConnected:
        // Data-gradient and weight-gradient GEMMs; the first layer skips the
        // data gradient.
        return l.inputs.front() == kInputId ? 1 : 2;
      case LayerKind::Norm:
        return 2;
      default:
        return 1;
    }
  }

  // Producers reached through transparent merge layers (gradient fan-in
  // targets); a producer of kInputId is dropped.
  void resolve_targets(int p, std::vector<int>& targets) const {
    if (p == kInputId) return;
    const LayerNode& l = net.layer(p);
    if (l.kind == LayerKind::ElementwiseAdd || l.kind == LayerKind::Concat) {
      for (int src : l.inputs) resolve_targets(src, targets);
      return;
    }
    targets.push_back(p);
  }

  void run();
  void forward_features();
  void backward_features();
  void weights_and_params();
  void vector_bytes();
};

void Ctx::forward_features() {
  const size_t n = net.layers().size();
  // Consumers per producer id.
  std::vector<std::vector<int>> consumers(n);
  for (const auto& l : net.layers())
    for (int src : l.inputs)
      if (src != kInputId) consumers[static_cast<size_t>(src)].push_back(l.id);

  // Network input: consumed straight from DRAM, never written.
  for (const auto& l : net.layers())
    for (int src : l.inputs)
      if (src == kInputId) {
        Path path = classify(kInputId, l.id);
        int64_t bytes = feat_bytes(kInputId);
        int64_t uses = fwd_uses(l);
        if (path == Path::DramNaked) {
          charge(Phase::Forward, Cat::FeatIn, l.id, false, true, uses * bytes, "input");
        } else {
          charge(Phase::Forward, Cat::FeatIn, l.id, false, true, bytes, "input");
          charge(Phase::Forward, Cat::FeatIn, l.id, false, false, (uses - 1) * bytes, "input");
        }
      }

  for (const auto& pl : net.layers()) {
    const int p = pl.id;
    const int64_t bytes = feat_bytes(p);
    const std::string tname = "t:" + pl.name;
    bool any_dram_consumer = false;
    bool any_onchip_consumer = false;

    for (int c : consumers[static_cast<size_t>(p)]) {
      const LayerNode& cl = net.layer(c);
      Path path = classify(p, c);
      if (cl.kind == LayerKind::Concat) {
        // Zero-copy slice placement; a DRAM-classified slice is spilled and
        // gathered once at the merge position.
        if (path == Path::OnChip) {
          any_onchip_consumer = true;
        } else {
          any_dram_consumer = true;
          charge(Phase::Forward, Cat::FeatIn, c, false, true, bytes, tname);
        }
        continue;
      }
      int64_t uses = fwd_uses(cl);
      switch (path) {
        case Path::OnChip:
          any_onchip_consumer = true;
          charge(Phase::Forward, Cat::FeatIn, c, false, false, uses * bytes, tname);
          break;
        case Path::DramGrouped:
          any_dram_consumer = true;
          charge(Phase::Forward, Cat::FeatIn, c, false, true, bytes, tname);
          charge(Phase::Forward, Cat::FeatIn, c, false, false, (uses - 1) * bytes, tname);
          break;
        case Path::DramNaked:
          any_dram_consumer = true;
          charge(Phase::Forward, Cat::FeatIn, c, false, true, uses * bytes, tname);
          break;
      }
    }

    // One DRAM write covers checkpointing, group boundaries and spills alike.
    // The network's final outputs leave to the (unmodeled) loss computation.
    bool is_final = consumers[static_cast<size_t>(p)].empty();
    bool ckpt = checkpointed(p);
    int64_t write_bytes = (ckpt || any_dram_consumer || is_final) ? bytes : 0;
    if (pl.kind == LayerKind::Concat && write_bytes > 0) {
      // Spilled slices already wrote themselves; only slices that stayed on
      // chip need flushing for a DRAM-side reader of the assembled region.
      int64_t spilled = 0;
      for (int src : pl.inputs)
        if (src != kInputId && classify(src, p) != Path::OnChip) spilled += feat_bytes(src);
      write_bytes = bytes - spilled;
    }
    if (write_bytes > 0)
      charge(Phase::Forward, ckpt ? Cat::CkptW : Cat::FeatOut, p, true, true, write_bytes, tname);
    if (any_onchip_consumer && pl.kind != LayerKind::Concat)
      charge(Phase::Forward, Cat::FeatIn, p, true, false, bytes, tname);  // produced into gbuf

    // Single-bit activation-gradient masks are written during forward.
    if (pl.kind == LayerKind::Activation && uses_relu_masks(s.config)) {
      int64_t mask = bits_to_bytes(pl.out_shape.elems() * s.mini_batch, sp.precision.relu_grad_bits);
      charge(Phase::Forward, Cat::ReluBits, p, true, true, mask, "mask:" + pl.name);
    }
  }
}

void Ctx::backward_features() {
  const size_t n = net.layers().size();
  bool grouped = uses_groups(s.config);

  auto is_merge = [&](int id) {
    LayerKind k = net.layer(id).kind;
    return k == LayerKind::ElementwiseAdd || k == LayerKind::Concat;
  };

  std::vector<std::vector<int>> consumers(n);
  for (const auto& l : net.layers())
    for (int src : l.inputs)
      if (src != kInputId) consumers[static_cast<size_t>(src)].push_back(l.id);

  // One gradient tensor per layer output. Merge outputs carry the shared
  // gradient region (adds run in place, concats are address-level, so their
  // input gradients alias the output gradient). A producer consumed only by
  // merges reads the merge's gradient directly; a producer with other
  // consumers gets the merge contribution folded into its first consumer's
  // data-gradient GEMM as accumulator initialization.
  struct Reader { int layer; int64_t uses; int64_t bytes; };
  struct GradTensor {
    std::vector<int> writers;      // backward producers, in backward order
    std::vector<Reader> readers;
    int64_t bytes = 0;
    bool external = false;         // loss-side gradient, no modeled writer
  };
  std::vector<GradTensor> grads(n);

  for (const auto& tl : net.layers()) {
    const int t = tl.id;
    GradTensor& g = grads[static_cast<size_t>(t)];
    g.bytes = feat_bytes(t);
    const auto& cons = consumers[static_cast<size_t>(t)];
    if (cons.empty()) {
      g.external = true;  // network output: gradient arrives from the loss
      g.readers.push_back({t, bwd_uses(tl), g.bytes});
      continue;
    }
    for (int c : cons)
      if (!is_merge(c)) g.writers.push_back(c);
    if (is_merge(t)) {
      // Readers are the merge's input producers (or fold-in reads when the
      // producer has consumers besides this merge).
      for (int src : tl.inputs) {
        if (src == kInputId) continue;
        int64_t contrib = tl.kind == LayerKind::Concat ? feat_bytes(src) : g.bytes;
        bool sole = consumers[static_cast<size_t>(src)].size() == 1;
        if (sole && !is_merge(src)) {
          g.readers.push_back({src, bwd_uses(net.layer(src)), contrib});
        } else if (!is_merge(src)) {
          // Fold into the producer's first non-merge consumer.
          int fold_at = src;
          for (int c : consumers[static_cast<size_t>(src)])
            if (!is_merge(c)) {
              fold_at = c;
              break;
            }
          g.readers.push_back({fold_at, 1, contrib});
        } else {
          g.readers.push_back({src, 1, contrib});  // chained merge: pass-through read
        }
      }
    } else {
      bool only_merges = true;
      for (int c : cons)
        if (!is_merge(c)) only_merges = false;
      if (only_merges) continue;  // alias of the merge gradient, no tensor of its own
      g.readers.push_back({t, bwd_uses(tl), g.bytes});
    }
  }

  for (const auto& tl : net.layers()) {
    const int t = tl.id;
    GradTensor& g = grads[static_cast<size_t>(t)];
    if (g.readers.empty()) continue;
    const std::string gname = "g:" + tl.name;

    // Writers execute in reverse topological order in backward.
    std::sort(g.writers.begin(), g.writers.end(), [&](int a, int b) {
      return pos[static_cast<size_t>(a)] > pos[static_cast<size_t>(b)];
    });
    int primary = g.writers.empty() ? -1 : g.writers.back();  // completes the tensor

    std::vector<Path> rpaths;
    bool any_dram_reader = false;
    for (const Reader& r : g.readers) {
      Path path = (g.external || primary < 0)
                      ? (grouped ? Path::DramGrouped : Path::DramNaked)
                      : classify_bwd(r.layer, primary);
      rpaths.push_back(path);
      if (path != Path::OnChip) any_dram_reader = true;
    }

    if (!g.external && primary >= 0) {
      // Partial-sum chain: each writer folds the previous partial into its
      // own GEMM accumulator; the last writer stores the completed tensor.
      for (size_t i = 0; i + 1 < g.writers.size(); ++i) {
        bool dram_hop = classify_bwd(g.writers[i], g.writers[i + 1]) != Path::OnChip;
        charge(Phase::Backward, Cat::FeatOut, g.writers[i], true, dram_hop, g.bytes, gname);
        charge(Phase::Backward, Cat::FeatIn, g.writers[i + 1], false, dram_hop, g.bytes, gname);
      }
      if (any_dram_reader)
        charge(Phase::Backward, Cat::FeatOut, primary, true, true, g.bytes, gname);
      else
        charge(Phase::Backward, Cat::FeatIn, primary, true, false, g.bytes, gname);
    }

    for (size_t ri = 0; ri < g.readers.size(); ++ri) {
      const Reader& r = g.readers[ri];
      switch (rpaths[ri]) {
        case Path::OnChip:
          charge(Phase::Backward, Cat::FeatIn, r.layer, false, false, r.uses * r.bytes, gname);
          break;
        case Path::DramGrouped:
          charge(Phase::Backward, Cat::FeatIn, r.layer, false, true, r.bytes, gname);
          charge(Phase::Backward, Cat::FeatIn, r.layer, false, false, (r.uses - 1) * r.bytes,
                 gname);
          break;
        case Path::DramNaked:
          charge(Phase::Backward, Cat::FeatIn, r.layer, false, true, r.uses * r.bytes, gname);
          break;
      }
    }
  }

  // Checkpoint reads.
  for (const auto& l : net.layers()) {
    switch (l.kind) {
      case LayerKind::Conv:
      case LayerKind::FullyConnected: {
        // im2col operand of the weight-gradient GEMM.
        int64_t in_bytes = feat_bytes(l.inputs.front());
        charge(Phase::Backward, Cat::CkptR, l.id, false, true, in_bytes, "x:" + l.name);
        break;
      }
      case LayerKind::Norm: {
        int64_t in_bytes = feat_bytes(l.inputs.front());
        if (grouped || (s.config == ExecConfig::IL && fits[static_cast<size_t>(l.id)])) {
          charge(Phase::Backward, Cat::CkptR, l.id, false, true, in_bytes, "x:" + l.name);
          charge(Phase::Backward, Cat::CkptR, l.id, false, false, in_bytes, "x:" + l.name);
        } else {
          charge(Phase::Backward, Cat::CkptR, l.id, false, true, 2 * in_bytes, "x:" + l.name);
        }
        break;
      }
      case LayerKind::Activation: {
        if (uses_relu_masks(s.config)) {
          int64_t mask = bits_to_bytes(l.out_shape.elems() * s.mini_batch,
                                       sp.precision.relu_grad_bits);
          charge(Phase::Backward, Cat::ReluBits, l.id, false, true, mask, "mask:" + l.name);
        } else {
          charge(Phase::Backward, Cat::CkptR, l.id, false, true, feat_bytes(l.id), "t:" + l.name);
        }
        break;
      }
      default:
        break;
    }
  }
}

void Ctx::weights_and_params() {
  for (const auto& l : net.layers()) {
    if (l.is_gemm()) {
      int64_t iters = iterations(l.id);
      int64_t wb = bits_to_bytes(l.conv.weight_elems(), sp.precision.weight_bits) +
                   (l.conv.bias ? bits_to_bytes(l.conv.c_out, sp.precision.weight_bits) : 0);
      int64_t gb = wb;  // partial gradient sums stored at weight precision
      charge(Phase::Forward, Cat::Weights, l.id, false, true, iters * wb, "w:" + l.name);
      // Backward re-reads weights for the data-gradient GEMM (first layer has
      // none) and streams gradient partial sums out every iteration, back in
      // every iteration but the first.
      if (l.inputs.front() != kInputId)
        charge(Phase::Backward, Cat::Weights, l.id, false, true, iters * wb, "w:" + l.name);
      charge(Phase::Backward, Cat::WGrad, l.id, true, true, iters * gb, "wg:" + l.name);
      charge(Phase::Backward, Cat::WGrad, l.id, false, true, (iters - 1) * gb, "wg:" + l.name);
    } else if (l.kind == LayerKind::Norm) {
      int64_t pb = bits_to_bytes(2 * l.out_shape.c, sp.precision.weight_bits);  // scale + shift
      int64_t iters = iterations(l.id);
      // Parameters live on chip across sub-batch iterations; DRAM sees one
      // load per step and one gradient store.
      charge(Phase::Forward, Cat::NormParams, l.id, false, true, pb, "p:" + l.name);
      charge(Phase::Backward, Cat::NormParams, l.id, true, true, pb, "pg:" + l.name);
      charge(Phase::Forward, Cat::NormParams, l.id, false, false, iters * pb, "p:" + l.name);
      charge(Phase::Backward, Cat::NormParams, l.id, false, false, 2 * iters * pb, "pg:" + l.name);
    }
  }
}

void Ctx::vector_bytes() {
  for (const auto& l : net.layers()) {
    if (l.is_gemm()) continue;
    LayerTraffic& lt = out.per_layer[static_cast<size_t>(l.id)];
    int64_t in = 0;
    for (int src : l.inputs) in += feat_bytes(src);
    int64_t outb = feat_bytes(l.id);
    switch (l.kind) {
      case LayerKind::Pool:
        lt.fwd_vector_bytes = in + outb;
        lt.bwd_vector_bytes = in + outb;
        break;
      case LayerKind::Norm:
        lt.fwd_vector_bytes = 2 * in + outb;
        lt.bwd_vector_bytes = 2 * (in + outb) + in;  // two passes over x and dy, one dx write
        break;
      case LayerKind::Activation:
        lt.fwd_vector_bytes = in + outb;
        lt.bwd_vector_bytes = in + outb;
        break;
      case LayerKind::ElementwiseAdd:
        lt.fwd_vector_bytes = in + outb;
        lt.bwd_vector_bytes = 0;  // gradient passes through
        break;
      case LayerKind::Concat:
        lt.fwd_vector_bytes = 0;  // address-level
        lt.bwd_vector_bytes = 0;
        break;
      default:
        break;
    }
  }
}

void Ctx::run() {
  forward_features();
  backward_features();
  weights_and_params();
  vector_bytes();
  for (const auto& lt : out.per_layer) {
    out.totals += lt.fwd_dram;
    out.totals += lt.bwd_dram;
  }
}

}  // namespace

TrafficReport compute_traffic(const NetworkGraph& net, const MbsSchedule& s,
                              const ScheduleParams& sp, bool with_events) {
  Ctx ctx(net, s, sp, with_events);
  ctx.run();
  return std::move(ctx.out);
}

int64_t schedule_dram_traffic(const NetworkGraph& net, const MbsSchedule& s,
                              const ScheduleParams& sp) {
  return compute_traffic(net, s, sp).totals.total();
}

}  // namespace wavesim
