#include <doctest.h>

#include "helpers.hpp"
#include "wavesim/footprint.hpp"
#include "wavesim/oracle/liveset.hpp"
#include "wavesim/trainer.hpp"

using namespace wavesim;

namespace {

// 8-bit features make element counts equal byte counts for readable toys.
Precision bytes_precision() {
  Precision p;
  p.feature_bits = 8;
  p.weight_bits = 8;
  p.relu_grad_bits = 1;
  return p;
}

}  // namespace

TEST_CASE("residual footprint: toy block from the live-set walkthrough") {
  // Block input 64 units/sample, main branch (64->32), (32->32), (32->64),
  // identity shortcut. Expected max over positions: 192.
  NetworkGraph net = parse_network(
      "net t\n"
      "input c=64 h=1 w=1\n"
      "block b kind=residual from=input merge=add\n"
      "branch\n"
      "  conv m1 from=^ cout=32 k=1\n"
      "  conv m2 from=m1 cout=32 k=1\n"
      "  conv m3 from=m2 cout=64 k=1\n"
      "branch\n"
      "end\n");
  Precision p = bytes_precision();
  const BlockNode& b = net.blocks()[0];
  CHECK(residual_block_footprint(net, b, p) == 192);
  CHECK(oracle::replay_block_live_set(net, b, 1, p) == 192);
  // Doubling the word size doubles the footprint.
  Precision p16 = p;
  p16.feature_bits = 16;
  CHECK(residual_block_footprint(net, b, p16) == 384);
}

TEST_CASE("residual footprint: single-layer main branch degenerate case") {
  NetworkGraph net = parse_network(
      "net t\n"
      "input c=10 h=1 w=1\n"
      "block b kind=residual from=input merge=add\n"
      "branch\n"
      "  conv m1 from=^ cout=10 k=1\n"
      "branch\n"
      "end\n");
  Precision p = bytes_precision();
  // max(one layer in+out, block_in + 2*block_out) = max(20, 30) = 30.
  CHECK(residual_block_footprint(net, net.blocks()[0], p) == 30);
  CHECK(oracle::replay_block_live_set(net, net.blocks()[0], 1, p) == 30);
}

TEST_CASE("inception footprint: two-branch toy") {
  // Block input 10, output 8; branch A: 10->4; branch B: 10->6, 6->4.
  NetworkGraph net = parse_network(
      "net t\n"
      "input c=10 h=1 w=1\n"
      "block b kind=inception from=input merge=concat\n"
      "branch\n"
      "  conv a1 from=^ cout=4 k=1\n"
      "branch\n"
      "  conv b1 from=^ cout=6 k=1\n"
      "  conv b2 from=b1 cout=4 k=1\n"
      "end\n");
  Precision p = bytes_precision();
  CHECK(inception_block_footprint(net, net.blocks()[0], p) == 24);
  CHECK(oracle::replay_block_live_set(net, net.blocks()[0], 1, p) == 24);
}

TEST_CASE("inception footprint: single-layer branches drop both conditional terms") {
  // Depth-one block: every position is both a branch head and at the final
  // depth, so the footprint is just the largest in+out.
  NetworkGraph net = parse_network(
      "net t\n"
      "input c=10 h=1 w=1\n"
      "block b kind=inception from=input merge=concat\n"
      "branch\n"
      "  conv a1 from=^ cout=4 k=1\n"
      "branch\n"
      "  conv b1 from=^ cout=6 k=1\n"
      "end\n");
  Precision p = bytes_precision();
  CHECK(inception_block_footprint(net, net.blocks()[0], p) == 16);  // 10 + 6
  CHECK(oracle::replay_block_live_set(net, net.blocks()[0], 1, p) == 16);
}

TEST_CASE("max_subbatch floors and edge cases") {
  CHECK(max_subbatch(3 * 1024 * 1024, 10 * 1024 * 1024) == 3);
  CHECK(max_subbatch(11, 10) == 0);
  CHECK(max_subbatch(5, 15) == 3);  // exact multiple boundary
  CHECK_THROWS_AS(max_subbatch(0, 10), Error);
}

TEST_CASE("footprint equals live-set replay on randomized toy blocks") {
  ref::Rng rng(20240517);
  Precision p = bytes_precision();
  int residuals = 0, inceptions = 0;
  for (int trial = 0; trial < 100; ++trial) {
    bool make_res = rng.next() % 2 == 0;
    std::string text = "net t\ninput c=" + std::to_string(rng.uniform_int(2, 64)) + " h=1 w=1\n";
    if (make_res) {
      ++residuals;
      int main_len = rng.uniform_int(1, 4);
      int out_c = rng.uniform_int(2, 64);
      text += "block b kind=residual from=input merge=add\nbranch\n";
      std::string prev = "^";
      for (int i = 0; i < main_len; ++i) {
        int c = i + 1 == main_len ? out_c : rng.uniform_int(2, 64);
        text += "  conv m" + std::to_string(i) + " from=" + prev + " cout=" + std::to_string(c) +
                " k=1\n";
        prev = "m" + std::to_string(i);
      }
      text += "branch\n";
      int short_len = rng.uniform_int(0, 2);
      prev = "^";
      for (int i = 0; i < short_len; ++i) {
        int c = i + 1 == short_len ? out_c : rng.uniform_int(2, 64);
        text += "  conv s" + std::to_string(i) + " from=" + prev + " cout=" + std::to_string(c) +
                " k=1\n";
        prev = "s" + std::to_string(i);
      }
      if (short_len == 0) {
        // identity shortcut needs matching shapes
        text.clear();
        int c_in = rng.uniform_int(2, 64);
        text = "net t\ninput c=" + std::to_string(c_in) + " h=1 w=1\n";
        text += "block b kind=residual from=input merge=add\nbranch\n";
        std::string pr = "^";
        for (int i = 0; i < main_len; ++i) {
          int c = i + 1 == main_len ? c_in : rng.uniform_int(2, 64);
          text += "  conv m" + std::to_string(i) + " from=" + pr + " cout=" + std::to_string(c) +
                  " k=1\n";
          pr = "m" + std::to_string(i);
        }
        text += "branch\n";
      }
      text += "end\n";
    } else {
      ++inceptions;
      int branches = rng.uniform_int(2, 4);
      text += "block b kind=inception from=input merge=concat\n";
      for (int br = 0; br < branches; ++br) {
        text += "branch\n";
        int len = rng.uniform_int(1, 3);
        std::string prev = "^";
        for (int i = 0; i < len; ++i) {
          std::string nm = "b" + std::to_string(br) + "_" + std::to_string(i);
          text += "  conv " + nm + " from=" + prev + " cout=" +
                  std::to_string(rng.uniform_int(2, 64)) + " k=1\n";
          prev = nm;
        }
      }
      text += "end\n";
    }
    NetworkGraph net = parse_network(text);
    const BlockNode& b = net.blocks()[0];
    int64_t analytic = b.kind == BlockKind::Residual ? residual_block_footprint(net, b, p)
                                                     : inception_block_footprint(net, b, p);
    for (int64_t sub : {int64_t{1}, int64_t{3}}) {
      int64_t replay = oracle::replay_block_live_set(net, b, sub, p);
      REQUIRE(analytic * sub == replay);
    }
  }
  CHECK(residuals > 20);
  CHECK(inceptions > 20);
}

TEST_CASE("plain chain peak equals max in+out") {
  NetworkGraph net = parse_network(
      "net t\n"
      "input c=16 h=1 w=1\n"
      "conv a from=input cout=8 k=1\n"
      "conv b from=a cout=32 k=1\n"
      "conv c from=b cout=4 k=1\n");
  Precision p = bytes_precision();
  std::vector<int> ids = {net.find("a")->id, net.find("b")->id, net.find("c")->id};
  CHECK(oracle::replay_plain_live_set(net, ids, 1, p) == 40);  // 8+32 at layer b
  CHECK(oracle::replay_plain_live_set(net, ids, 2, p) == 80);
}

TEST_CASE("inception footprint grows monotonically with branch output size") {
  Precision p = bytes_precision();
  auto fp = [&](int c_mid) {
    NetworkGraph net = parse_network(
        "net t\ninput c=10 h=1 w=1\n"
        "block b kind=inception from=input merge=concat\n"
        "branch\n  conv a1 from=^ cout=4 k=1\n"
        "branch\n  conv b1 from=^ cout=" + std::to_string(c_mid) +
        " k=1\n  conv b2 from=b1 cout=4 k=1\nend\n");
    return inception_block_footprint(net, net.blocks()[0], p);
  };
  int64_t prev = 0;
  for (int c = 2; c <= 40; c += 2) {
    int64_t v = fp(c);
    CHECK(v >= prev);
    prev = v;
  }
}
