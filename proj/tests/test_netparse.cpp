#include <doctest.h>

#include "helpers.hpp"
#include "wavesim/netparse.hpp"

using namespace wavesim;

TEST_CASE("block parsing builds branches, merge and units") {
  NetworkGraph net = parse_network(
      "net t\n"
      "input c=8 h=8 w=8\n"
      "conv pre from=input cout=8 k=1\n"
      "block b kind=residual from=pre merge=add\n"
      "branch\n"
      "  conv m1 from=^ cout=8 k=3 pad=1\n"
      "  conv m2 from=m1 cout=8 k=3 pad=1\n"
      "branch\n"
      "end\n"
      "act post from=b\n");
  REQUIRE(net.blocks().size() == 1);
  const BlockNode& b = net.blocks()[0];
  CHECK(b.branches.size() == 2);
  CHECK(b.branches[1].empty());
  const LayerNode& merge = net.layer(b.merge_layer);
  CHECK(merge.kind == LayerKind::ElementwiseAdd);
  CHECK(merge.inputs.size() == 2);
  // units: pre, block, post
  REQUIRE(net.units().size() == 3);
  CHECK(net.units()[1].is_block);
}

TEST_CASE("unknown reference names the offender") {
  try {
    parse_network("net t\ninput c=1 h=2 w=2\nconv a from=nope cout=1 k=1\n");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("nope") != std::string::npos);
  }
}

TEST_CASE("schema violations are rejected") {
  CHECK_THROWS_AS(parse_network("net t\nconv a from=input cout=1 k=1\n"), Error);  // no input
  CHECK_THROWS_AS(parse_network("net t\ninput c=1 h=2 w=2\nfrobnicate a from=input\n"), Error);
  CHECK_THROWS_AS(parse_network("net t\ninput c=1 h=2 w=2\nconv a from=input k=1\n"),
                  Error);  // missing cout
}

TEST_CASE("fan-out heads become branch terminals feeding the merge") {
  NetworkGraph net = parse_network(
      "net t\n"
      "input c=8 h=8 w=8\n"
      "block b kind=inception from=input merge=concat\n"
      "branch\n"
      "  conv b0 from=^ cout=4 k=1\n"
      "branch\n"
      "  conv stem from=^ cout=6 k=1\n"
      "  conv h1 from=stem cout=5 k=1\n"
      "  conv h2 from=stem cout=3 k=1\n"
      "end\n");
  const BlockNode& b = net.blocks()[0];
  const LayerNode& merge = net.layer(b.merge_layer);
  CHECK(merge.inputs.size() == 3);
  CHECK(merge.out_shape.c == 12);
}

TEST_CASE("all bundled networks load and form unit chains") {
  for (const char* name : {"resnet50", "inception_v3", "inception_v4", "alexnet"}) {
    NetworkGraph net = load_bundled(name);
    CHECK(net.layers().size() > 10);
    CHECK(!net.units().empty());
    // Exec order covers every layer exactly once.
    CHECK(net.exec_order().size() == net.layers().size());
  }
}
