#include "wavesim/netparse.hpp"

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

namespace wavesim {

namespace {

struct Line {
  int number = 0;
  std::string head;
  std::vector<std::string> words;  // tokens after the head
};

std::vector<Line> tokenize(const std::string& text) {
  std::vector<Line> out;
  std::istringstream is(text);
  std::string raw;
  int number = 0;
  while (std::getline(is, raw)) {
    ++number;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    Line line;
    line.number = number;
    if (!(ls >> line.head)) continue;
    std::string w;
    while (ls >> w) line.words.push_back(w);
    out.push_back(std::move(line));
  }
  return out;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : lines_(tokenize(text)) {}

  NetworkGraph run() {
    for (const Line& line : lines_) parse_line(line);
    if (name_.empty()) throw Error("network file missing 'net <name>' line");
    if (in_block_) throw Error("unterminated block '" + blocks_.back().name + "'");
    return NetworkGraph(name_, input_, std::move(layers_), std::move(blocks_));
  }

 private:
  std::vector<Line> lines_;
  std::string name_;
  TensorShape input_;
  bool have_input_ = false;
  std::vector<LayerNode> layers_;
  std::vector<BlockNode> blocks_;
  std::map<std::string, int> by_name_;  // layer and block names -> layer id

  bool in_block_ = false;
  int block_split_ = kInputId;
  MergeOp block_merge_ = MergeOp::Add;
  BlockKind block_kind_ = BlockKind::Residual;
  std::string block_name_;
  std::vector<std::vector<int>> branches_;

  [[noreturn]] void fail(const Line& l, const std::string& msg) {
    throw Error("line " + std::to_string(l.number) + ": " + msg);
  }

  static std::map<std::string, std::string> keyvals(const Line& l, size_t from) {
    std::map<std::string, std::string> kv;
    for (size_t i = from; i < l.words.size(); ++i) {
      const std::string& w = l.words[i];
      auto eq = w.find('=');
      if (eq == std::string::npos)
        kv[w] = "true";
      else
        kv[w.substr(0, eq)] = w.substr(eq + 1);
    }
    return kv;
  }

  int64_t get_int(const Line& l, std::map<std::string, std::string>& kv, const std::string& key,
                  std::optional<int64_t> def = std::nullopt) {
    auto it = kv.find(key);
    if (it == kv.end()) {
      if (def) return *def;
      fail(l, "missing attribute '" + key + "'");
    }
    try {
      return std::stoll(it->second);
    } catch (...) {
      fail(l, "attribute '" + key + "' is not an integer");
    }
  }

  std::string get_str(const Line& l, std::map<std::string, std::string>& kv,
                      const std::string& key, const std::string& def = "") {
    auto it = kv.find(key);
    if (it == kv.end()) {
      if (!def.empty()) return def;
      fail(l, "missing attribute '" + key + "'");
    }
    return it->second;
  }

  int resolve(const Line& l, const std::string& ref) {
    if (ref == "input") return kInputId;
    if (ref == "^") {
      if (!in_block_) fail(l, "'^' only valid inside a block branch");
      return block_split_;
    }
    auto it = by_name_.find(ref);
    if (it == by_name_.end()) fail(l, "unknown layer '" + ref + "'");
    return it->second;
  }

  std::vector<int> resolve_from(const Line& l, std::map<std::string, std::string>& kv) {
    std::string spec = get_str(l, kv, "from");
    std::vector<int> ids;
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ',')) ids.push_back(resolve(l, part));
    if (ids.empty()) fail(l, "empty 'from' list");
    return ids;
  }

  int add_layer(const Line& l, LayerNode node) {
    if (by_name_.count(node.name)) fail(l, "duplicate layer name '" + node.name + "'");
    node.id = static_cast<int>(layers_.size());
    if (in_block_) {
      node.block = static_cast<int>(blocks_.size());
      branches_.back().push_back(node.id);
    }
    by_name_[node.name] = node.id;
    layers_.push_back(std::move(node));
    return layers_.back().id;
  }

  void parse_line(const Line& l) {
    const std::string& head = l.head;
    if (head == "net") {
      if (l.words.size() != 1) fail(l, "usage: net <name>");
      name_ = l.words[0];
      return;
    }
    if (head == "input") {
      auto kv = keyvals(l, 0);
      input_ = {1, get_int(l, kv, "c"), get_int(l, kv, "h"), get_int(l, kv, "w")};
      have_input_ = true;
      return;
    }
    if (!have_input_) throw Error("line " + std::to_string(l.number) + ": 'input' must come first");

    if (head == "block") {
      if (in_block_) fail(l, "nested blocks are not supported");
      if (l.words.empty()) fail(l, "usage: block <name> kind=... from=... merge=...");
      block_name_ = l.words[0];
      auto kv = keyvals(l, 1);
      std::string kind = get_str(l, kv, "kind");
      if (kind == "residual")
        block_kind_ = BlockKind::Residual;
      else if (kind == "inception")
        block_kind_ = BlockKind::Inception;
      else
        fail(l, "block kind must be residual or inception");
      std::string merge = get_str(l, kv, "merge");
      if (merge == "add")
        block_merge_ = MergeOp::Add;
      else if (merge == "concat")
        block_merge_ = MergeOp::Concat;
      else
        fail(l, "merge must be add or concat");
      block_split_ = resolve(l, get_str(l, kv, "from"));
      in_block_ = true;
      branches_.clear();
      return;
    }
    if (head == "branch") {
      if (!in_block_) fail(l, "'branch' outside a block");
      branches_.emplace_back();
      return;
    }
    if (head == "end") {
      if (!in_block_) fail(l, "'end' outside a block");
      finish_block(l);
      return;
    }

    LayerNode node;
    if (l.words.empty()) fail(l, "layer line needs a name");
    node.name = l.words[0];
    auto kv = keyvals(l, 1);

    if (head == "conv") {
      node.kind = LayerKind::Conv;
      node.inputs = resolve_from(l, kv);
      node.conv.c_out = get_int(l, kv, "cout");
      int64_t k = get_int(l, kv, "k", 1);
      node.conv.r = get_int(l, kv, "kh", k);
      node.conv.s = get_int(l, kv, "kw", k);
      node.conv.stride = get_int(l, kv, "stride", 1);
      int64_t pad = get_int(l, kv, "pad", 0);
      node.conv.pad_h = get_int(l, kv, "padh", pad);
      node.conv.pad_w = get_int(l, kv, "padw", pad);
      node.conv.bias = kv.count("bias") && kv["bias"] == "true";
      node.conv.c_in = 0;  // filled from the producer shape
    } else if (head == "fc") {
      node.kind = LayerKind::FullyConnected;
      node.inputs = resolve_from(l, kv);
      node.conv.c_out = get_int(l, kv, "cout");
      node.conv.bias = kv.count("bias") && kv["bias"] == "true";
    } else if (head == "pool") {
      node.kind = LayerKind::Pool;
      node.inputs = resolve_from(l, kv);
      std::string kind = get_str(l, kv, "kind", "max");
      if (kind == "max")
        node.pool.kind = PoolKind::Max;
      else if (kind == "avg")
        node.pool.kind = PoolKind::Avg;
      else
        fail(l, "pool kind must be max or avg");
      if (kv.count("global") && kv["global"] == "true") {
        node.pool.global = true;
      } else {
        int64_t k = get_int(l, kv, "k", 2);
        node.pool.r = get_int(l, kv, "kh", k);
        node.pool.s = get_int(l, kv, "kw", k);
        node.pool.stride = get_int(l, kv, "stride", node.pool.r);
        node.pool.pad = get_int(l, kv, "pad", 0);
      }
    } else if (head == "norm") {
      node.kind = LayerKind::Norm;
      node.inputs = resolve_from(l, kv);
      std::string kind = get_str(l, kv, "kind", "gn");
      if (kind == "gn")
        node.norm.kind = NormKind::GroupNorm;
      else if (kind == "bn")
        node.norm.kind = NormKind::BatchNorm;
      else
        fail(l, "norm kind must be gn or bn");
      node.norm.groups = get_int(l, kv, "groups", 32);
    } else if (head == "act") {
      node.kind = LayerKind::Activation;
      node.inputs = resolve_from(l, kv);
    } else if (head == "add") {
      node.kind = LayerKind::ElementwiseAdd;
      node.inputs = resolve_from(l, kv);
    } else if (head == "concat") {
      node.kind = LayerKind::Concat;
      node.inputs = resolve_from(l, kv);
    } else {
      fail(l, "unknown directive '" + head + "'");
    }

    // Late-bound conv input channels come from the first producer.
    add_layer(l, std::move(node));
  }

  void finish_block(const Line& l) {
    if (branches_.empty()) fail(l, "block '" + block_name_ + "' has no branches");
    // Merge layer consumes every branch's terminal outputs; an empty branch
    // contributes the block input itself (identity path).
    std::vector<int> merge_inputs;
    for (const auto& br : branches_) {
      if (br.empty()) {
        merge_inputs.push_back(block_split_);
        continue;
      }
      // Terminals: branch members whose output no other branch member consumes.
      std::vector<bool> consumed(br.size(), false);
      for (size_t i = 0; i < br.size(); ++i)
        for (size_t j = 0; j < br.size(); ++j)
          for (int src : layers_[static_cast<size_t>(br[j])].inputs)
            if (src == br[i]) consumed[i] = true;
      for (size_t i = 0; i < br.size(); ++i)
        if (!consumed[i]) merge_inputs.push_back(br[i]);
    }
    if (merge_inputs.size() < 2)
      fail(l, "block '" + block_name_ + "' merge needs >= 2 inputs");

    LayerNode merge;
    merge.name = block_name_;
    merge.kind = block_merge_ == MergeOp::Add ? LayerKind::ElementwiseAdd : LayerKind::Concat;
    merge.inputs = merge_inputs;

    BlockNode b;
    b.kind = block_kind_;
    b.name = block_name_;
    b.split_input = block_split_;
    b.branches = branches_;
    b.merge = block_merge_;

    in_block_ = false;
    int merge_id = add_layer(l, std::move(merge));
    layers_.back().block = static_cast<int>(blocks_.size());

    b.merge_layer = merge_id;
    blocks_.push_back(std::move(b));
  }
};

}  // namespace

NetworkGraph parse_network(const std::string& text) {
  Parser p(text);
  NetworkGraph net = p.run();
  return net;
}

NetworkGraph load_network_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open network file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_network(ss.str());
}

}  // namespace wavesim
