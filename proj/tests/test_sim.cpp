#include <doctest.h>

#include "helpers.hpp"
#include "wavesim/oracle/eventlog.hpp"
#include "wavesim/sim.hpp"

using namespace wavesim;

namespace {

AcceleratorConfig accel() { return AcceleratorConfig{}; }
MemoryConfig hbm2() { return memory_preset("hbm2"); }
EnergyModel energy() { return EnergyModel{}; }

}  // namespace

TEST_CASE("zero-layer network gives an empty report") {
  NetworkGraph net = parse_network("net empty\ninput c=1 h=1 w=1\n");
  SimReport r = simulate_config(net, accel(), hbm2(), energy(), 4, ExecConfig::Baseline);
  CHECK(r.dram.total() == 0);
  CHECK(r.wall_cycles == 0);
  CHECK(r.total_macs == 0);
}

TEST_CASE("single-conv IL ledger equals the hand-computed audit") {
  // One conv, 4x4x2 input, 2 output channels, 1x1 kernel, mini-batch 2,
  // footprint fits the buffer. Audited byte flow at 16b words:
  //   forward: read images once (128 B), read weights (8 B), write the final
  //            output for the loss (128 B)
  //   backward: loss-side gradient read once (the first layer runs only the
  //            weight-gradient GEMM, so no second pass and no weight re-read),
  //            images re-read as the im2col operand (128 B), gradient
  //            partials written once (8 B), nothing re-read.
  NetworkGraph net = parse_network(
      "net one\n"
      "input c=2 h=4 w=4\n"
      "conv c from=input cout=2 k=1\n");
  ScheduleParams sp = accel().sched_params();
  MbsSchedule s = build_schedule(net, sp, 2, ExecConfig::IL);
  TrafficReport t = compute_traffic(net, s, sp, true);

  const int64_t in_bytes = 2 * 2 * 4 * 4 * 2;  // 128
  const int64_t w_bytes = 2 * 2 * 2;           // 8
  CHECK(t.totals.features_in == in_bytes + in_bytes);  // fwd images + output grad once
  CHECK(t.totals.features_out == in_bytes);            // final output write
  CHECK(t.totals.weights == w_bytes);                  // forward only (no data gradient)
  CHECK(t.totals.checkpoints_fwd_write == 0);          // nothing needs stashing
  CHECK(t.totals.checkpoints_bwd_read == in_bytes);    // conv input re-read (the images)
  CHECK(t.totals.weight_grad_rw == w_bytes);           // one write, no re-read
  CHECK(t.totals.relu_grad_bits == 0);
  oracle::verify_event_log(net, t);
}

TEST_CASE("event-log replay validates every config on a toy chain") {
  NetworkGraph net = parse_network(
      "net chain\n"
      "input c=4 h=16 w=16\n"
      "conv a from=input cout=8 k=3 pad=1 stride=2\n"
      "norm an from=a groups=4\n"
      "act ar from=an\n"
      "conv b from=ar cout=8 k=3 pad=1\n"
      "act br from=b\n"
      "pool p from=br kind=max k=2 stride=2\n"
      "fc f from=p cout=10\n");
  ScheduleParams sp = accel().sched_params();
  for (ExecConfig cfg : {ExecConfig::Baseline, ExecConfig::ArchOpt, ExecConfig::IL,
                         ExecConfig::MbsFS, ExecConfig::Mbs1, ExecConfig::Mbs2}) {
    MbsSchedule s = build_schedule(net, sp, 8, cfg);
    TrafficReport t = compute_traffic(net, s, sp, true);
    oracle::verify_event_log(net, t);
    oracle::verify_boundary_conservation(net, t);
  }
}

TEST_CASE("enlarging the buffer never increases DRAM traffic") {
  NetworkGraph net = load_bundled("resnet50");
  for (ExecConfig cfg : {ExecConfig::IL, ExecConfig::Mbs1, ExecConfig::Mbs2}) {
    int64_t prev = -1;
    for (int64_t mib : {5, 8, 10, 16, 24, 40}) {
      AcceleratorConfig a = accel();
      a.global_buffer_bytes = mib * 1024 * 1024;
      SimReport r = simulate_config(net, a, hbm2(), energy(), 32, cfg);
      if (prev >= 0) CHECK(r.dram.total() <= prev);
      prev = r.dram.total();
    }
  }
}

TEST_CASE("simulation reports are bit-identical across runs") {
  NetworkGraph net = load_bundled("inception_v3");
  SimReport a = simulate_config(net, accel(), hbm2(), energy(), 32, ExecConfig::Mbs2);
  SimReport b = simulate_config(net, accel(), hbm2(), energy(), 32, ExecConfig::Mbs2);
  CHECK(a.dram.total() == b.dram.total());
  CHECK(a.wall_cycles == b.wall_cycles);
  CHECK(a.gbuf_bytes == b.gbuf_bytes);
  CHECK(a.energy.total() == b.energy.total());
}

TEST_CASE("baseline and archopt share traffic; timing differs") {
  NetworkGraph net = load_bundled("resnet50");
  auto rs = compare_configs(net, accel(), hbm2(), energy(), 32);
  CHECK(rs[0].dram.total() == rs[1].dram.total());
  CHECK(rs[1].wall_cycles < rs[0].wall_cycles);
}

TEST_CASE("config ordering on the deep networks") {
  for (const char* name : {"resnet50", "inception_v3", "inception_v4"}) {
    NetworkGraph net = load_bundled(name);
    auto rs = compare_configs(net, accel(), hbm2(), energy(), 32);
    // Baseline, ArchOpt, IL, MBS-FS, MBS1, MBS2
    CHECK(rs[5].dram.total() < rs[4].dram.total());
    CHECK(rs[4].dram.total() < rs[3].dram.total());
    CHECK(rs[3].dram.total() < rs[2].dram.total());
    CHECK(rs[2].dram.total() < rs[0].dram.total());
  }
}

TEST_CASE("wall time never beats the compute and bandwidth lower bounds") {
  NetworkGraph net = load_bundled("resnet50");
  AcceleratorConfig a = accel();
  MemoryConfig m = hbm2();
  for (ExecConfig cfg : {ExecConfig::Baseline, ExecConfig::Mbs2}) {
    SimReport r = simulate_config(net, a, m, energy(), 32, cfg);
    int64_t pes = a.array.pe_rows * a.array.pe_cols;
    CHECK(r.wall_cycles >= r.total_macs / pes);
    double bytes_per_cycle = m.bandwidth_bytes_per_s * m.efficiency / a.clock_hz;
    CHECK(static_cast<double>(r.wall_cycles) >=
          static_cast<double>(r.dram.total()) / bytes_per_cycle - 1.0);
  }
}

TEST_CASE("DRAM capacity overflow is reported") {
  NetworkGraph net = load_bundled("resnet50");
  MemoryConfig tiny = hbm2();
  tiny.capacity_bytes = 64 * 1024 * 1024;
  CHECK_THROWS_WITH_AS(simulate_config(net, accel(), tiny, energy(), 32, ExecConfig::Baseline),
                       doctest::Contains("capacity"), Error);
}

TEST_CASE("memory presets match the published table") {
  CHECK(memory_preset("hbm2").bandwidth_bytes_per_s == doctest::Approx(300.0 * 1073741824.0));
  CHECK(memory_preset("hbm2x2").bandwidth_bytes_per_s == doctest::Approx(600.0 * 1073741824.0));
  CHECK(memory_preset("gddr5").bandwidth_bytes_per_s == doctest::Approx(384.0 * 1073741824.0));
  CHECK(memory_preset("lpddr4").bandwidth_bytes_per_s == doctest::Approx(239.2 * 1073741824.0));
  // Bandwidth fractions quoted in the sensitivity study.
  CHECK(memory_preset("gddr5").bandwidth_bytes_per_s /
            memory_preset("hbm2x2").bandwidth_bytes_per_s ==
        doctest::Approx(0.64));
  CHECK(memory_preset("lpddr4").bandwidth_bytes_per_s /
            memory_preset("hbm2x2").bandwidth_bytes_per_s ==
        doctest::Approx(0.39867).epsilon(0.001));
}

TEST_CASE("moving bytes from DRAM to the global buffer saves 7/8 of their energy") {
  SimReport r;
  r.dram.features_in = 1000;
  r.gbuf_bytes = 0;
  r.seconds = 0.0;
  EnergyModel e;
  double before = energy_report(r, e).total();
  r.dram.features_in = 0;
  r.gbuf_bytes = 1000;
  double after = energy_report(r, e).total();
  CHECK(before - after == doctest::Approx(1000 * e.e_dram_pj_per_byte * (7.0 / 8.0) * 1e-12));
}

TEST_CASE("zero traffic and zero macs leave only static energy") {
  SimReport r;
  r.seconds = 2.0;
  EnergyModel e;
  EnergyBreakdown b = energy_report(r, e);
  CHECK(b.total() == doctest::Approx(2.0 * e.p_static_w));
}

TEST_CASE("9.3%-style residency: little inter-layer data fits a 10 MiB buffer") {
  // Fraction of inter-layer data volume produced by layers whose full
  // mini-batch footprint fits the buffer.
  NetworkGraph net = load_bundled("resnet50");
  Precision p;
  int64_t fits = 0, total = 0;
  for (const auto& l : net.layers()) {
    int64_t vol = 32 * l.out_shape.bytes(p.feature_bits);
    total += vol;
    if (32 * plain_layer_footprint(net, l.id, p) <= 10 * 1024 * 1024) fits += vol;
  }
  double frac = static_cast<double>(fits) / static_cast<double>(total);
  CHECK(frac > 0.06);
  CHECK(frac < 0.13);
}
