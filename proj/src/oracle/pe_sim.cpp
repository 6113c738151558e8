#include "wavesim/oracle/pe_sim.hpp"

#include <algorithm>
#include <map>

namespace wavesim::oracle {

namespace {

struct AElem {
  bool valid = false;
  int64_t value = 0;
  int64_t row = -1;   // A row index r
  int64_t wave = -1;
};

struct Psum {
  bool valid = false;
  int64_t value = 0;
  int64_t row = -1;
  int64_t wave = -1;
};

struct WeightReg {
  int64_t value = 0;
  int64_t wave = -1;  // which wave's block this register currently holds
};

}  // namespace

int64_t TileRun::total_macs() const {
  int64_t sum = 0;
  for (int64_t a : active_pes) sum += a;
  return sum;
}

Mat matmul_reference(const Mat& a, const Mat& b) {
  if (a.cols != b.rows) throw Error("matmul: dimension mismatch");
  Mat c(a.rows, b.cols);
  for (int64_t i = 0; i < a.rows; ++i)
    for (int64_t kk = 0; kk < a.cols; ++kk) {
      int64_t av = a.at(i, kk);
      for (int64_t j = 0; j < b.cols; ++j) c.at(i, j) += av * b.at(kk, j);
    }
  return c;
}

TileRun simulate_tile(const Mat& a, const Mat& b, int64_t grid_rows, int64_t grid_cols,
                      WaveMode mode) {
  if (a.cols != b.rows) throw Error("pe_sim: dimension mismatch");
  const int64_t m = a.rows, big_k = a.cols, width = b.cols;
  if (width > grid_cols) throw Error("pe_sim: tile wider than the array");
  const int64_t k = grid_rows;
  const int64_t waves = (big_k + k - 1) / k;

  auto stream_start = [&](int64_t w) {
    return mode == WaveMode::Gapped ? w * (k + m) + k : k + w * m;
  };

  // Pre-scheduled events, keyed by cycle.
  struct RegWrite { int reg; int64_t i, j, value, wave; };
  struct AInject { int64_t i, value, row, wave; };
  struct PInject { int64_t j, row, wave; };
  std::map<int64_t, std::vector<RegWrite>> reg_writes;
  std::map<int64_t, std::vector<AInject>> a_injects;
  std::map<int64_t, std::vector<PInject>> p_injects;

  for (int64_t w = 0; w < waves; ++w) {
    int64_t k_w = std::min(k, big_k - w * k);
    int64_t fill_base;
    int reg;
    if (mode == WaveMode::Gapped) {
      fill_base = w * (k + m);
      reg = 0;
    } else {
      fill_base = w == 0 ? 0 : stream_start(w) - 1;
      reg = static_cast<int>(w % 2);
    }
    for (int64_t i = 0; i < k; ++i)
      for (int64_t j = 0; j < width; ++j) {
        int64_t value = i < k_w ? b.at(w * k + i, j) : 0;
        reg_writes[fill_base + i + j].push_back({reg, i, j, value, w});
      }
    for (int64_t r = 0; r < m; ++r) {
      int64_t entry = stream_start(w) + r;
      for (int64_t i = 0; i < k_w; ++i)
        a_injects[entry + i].push_back({i, a.at(r, w * k + i), r, w});
      for (int64_t j = 0; j < width; ++j) p_injects[entry + j].push_back({j, r, w});
    }
  }

  std::vector<std::vector<WeightReg>> regs[2];
  for (auto& r : regs)
    r.assign(static_cast<size_t>(k), std::vector<WeightReg>(static_cast<size_t>(grid_cols)));
  std::vector<std::vector<AElem>> agrid(static_cast<size_t>(k),
                                        std::vector<AElem>(static_cast<size_t>(grid_cols)));
  std::vector<std::vector<Psum>> pgrid(static_cast<size_t>(k),
                                       std::vector<Psum>(static_cast<size_t>(grid_cols)));

  std::map<int64_t, std::vector<Psum>> exits;  // accumulate cycle -> completed psums
  struct PsumTagged { Psum p; int64_t col; };
  std::map<int64_t, std::vector<PsumTagged>> exit_writes;

  TileRun run;
  run.c = Mat(m, width);
  int64_t expected_outputs = waves * m * width;
  int64_t done_outputs = 0;

  for (int64_t t = 0; done_outputs < expected_outputs; ++t) {
    if (t > stream_start(waves) + 4 * (k + m + width) + 16)
      throw Error("pe_sim: did not quiesce (timing bug)");

    if (auto it = reg_writes.find(t); it != reg_writes.end())
      for (const RegWrite& rw : it->second) {
        regs[rw.reg][static_cast<size_t>(rw.i)][static_cast<size_t>(rw.j)] = {rw.value, rw.wave};
      }
    if (auto it = a_injects.find(t); it != a_injects.end())
      for (const AInject& ai : it->second) {
        auto& cell = agrid[static_cast<size_t>(ai.i)][0];
        if (cell.valid) throw Error("pe_sim: A injection collision");
        cell = {true, ai.value, ai.row, ai.wave};
      }
    if (auto it = p_injects.find(t); it != p_injects.end())
      for (const PInject& pi : it->second) {
        auto& cell = pgrid[0][static_cast<size_t>(pi.j)];
        if (cell.valid) throw Error("pe_sim: psum injection collision");
        cell = {true, 0, pi.row, pi.wave};
      }

    // MAC phase: a PE fires when an A element and a partial sum meet.
    int64_t active = 0;
    for (int64_t i = 0; i < k; ++i)
      for (int64_t j = 0; j < grid_cols; ++j) {
        AElem& ae = agrid[static_cast<size_t>(i)][static_cast<size_t>(j)];
        Psum& ps = pgrid[static_cast<size_t>(i)][static_cast<size_t>(j)];
        if (!ae.valid || !ps.valid) continue;
        if (ae.row != ps.row || ae.wave != ps.wave)
          throw Error("pe_sim: skew broke operand pairing");
        const WeightReg& wr =
            regs[mode == WaveMode::Gapped ? 0 : ae.wave % 2][static_cast<size_t>(i)]
                [static_cast<size_t>(j)];
        if (wr.wave != ae.wave) throw Error("pe_sim: weight register holds the wrong wave");
        ps.value += ae.value * wr.value;
        ++active;
      }
    run.active_pes.push_back(active);

    // Shift phase: psums move down (bottom row exits), A moves right.
    for (int64_t j = 0; j < grid_cols; ++j) {
      Psum& bottom = pgrid[static_cast<size_t>(k - 1)][static_cast<size_t>(j)];
      if (bottom.valid) exit_writes[t + 2].push_back({bottom, j});
    }
    for (int64_t i = k - 1; i >= 1; --i)
      for (int64_t j = 0; j < grid_cols; ++j)
        pgrid[static_cast<size_t>(i)][static_cast<size_t>(j)] =
            pgrid[static_cast<size_t>(i - 1)][static_cast<size_t>(j)];
    for (int64_t j = 0; j < grid_cols; ++j) pgrid[0][static_cast<size_t>(j)] = {};
    for (int64_t i = 0; i < k; ++i) {
      for (int64_t j = grid_cols - 1; j >= 1; --j)
        agrid[static_cast<size_t>(i)][static_cast<size_t>(j)] =
            agrid[static_cast<size_t>(i)][static_cast<size_t>(j - 1)];
      agrid[static_cast<size_t>(i)][0] = {};
    }

    // Accumulator writes landing this cycle (t is still "in flight" until the
    // write completes, so the cycle count includes it).
    if (auto it = exit_writes.find(t); it != exit_writes.end()) {
      for (const PsumTagged& pt : it->second) {
        run.c.at(pt.p.row, pt.col) += pt.p.value;
        ++done_outputs;
      }
      exit_writes.erase(it);
    }
    run.cycles = t + 1;
  }
  return run;
}

}  // namespace wavesim::oracle
