#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wavesim/netparse.hpp"
#include "wavesim/report.hpp"
#include "wavesim/sim.hpp"
#include "wavesim/trainer.hpp"

namespace fs = std::filesystem;
using namespace wavesim;

namespace {

const char* kBundled[] = {"resnet50", "inception_v3", "inception_v4", "alexnet"};

NetworkGraph resolve_network(const std::string& spec) {
  if (fs::exists(spec)) return load_network_file(spec);
  for (const char* dir : {"networks", "../networks"}) {
    fs::path p = fs::path(dir) / (spec + ".net");
    if (fs::exists(p)) return load_network_file(p.string());
  }
  std::string avail;
  for (const char* n : kBundled) avail += std::string(" ") + n;
  throw Error("unknown network '" + spec + "'; bundled networks:" + avail +
              " (or pass a .net file path)");
}

MemoryConfig resolve_memory(const std::string& spec, bool unlimited) {
  MemoryConfig m = is_memory_preset(spec) ? memory_preset(spec) : load_memory_file(spec);
  m.unlimited = unlimited;
  return m;
}

struct CommonOpts {
  std::string network;
  std::string accel_file;
  std::string mem = "hbm2";
  std::string energy_file;
  int64_t mini_batch = 32;
  bool unlimited_bandwidth = false;
  std::string out_json;
  std::string out_csv;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_mem = true) {
  cmd->add_option("--network", o.network, "bundled network id or .net file")->required();
  cmd->add_option("--accel", o.accel_file, "accelerator config file");
  if (with_mem) cmd->add_option("--mem", o.mem, "memory preset (hbm2|hbm2x2|gddr5|lpddr4) or file");
  cmd->add_option("--mini-batch", o.mini_batch, "samples per core per step");
  cmd->add_flag("--unlimited-bandwidth", o.unlimited_bandwidth,
                "ignore DRAM time (utilization studies)");
  cmd->add_option("--out-json", o.out_json, "write a JSON summary here");
  cmd->add_option("--out-csv", o.out_csv, "write per-layer / table CSV here");
}

AcceleratorConfig resolve_accel(const CommonOpts& o) {
  return o.accel_file.empty() ? AcceleratorConfig{} : load_accelerator_file(o.accel_file);
}

EnergyModel resolve_energy(const CommonOpts& o) {
  return o.energy_file.empty() ? EnergyModel{} : load_energy_file(o.energy_file);
}

int64_t parse_mib(const std::string& s) {
  return static_cast<int64_t>(std::stod(s) * 1024.0 * 1024.0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CNN training scheduler and accelerator performance model"};
  app.require_subcommand(1);

  CommonOpts o;
  std::string config_name = "mbs2";
  std::string dump_schedule;
  std::vector<std::string> buffer_sizes = {"5", "10", "20", "40"};
  std::vector<std::string> mem_list = {"hbm2x2", "hbm2", "gddr5", "lpddr4"};
  std::vector<std::string> config_list;

  auto* sim_cmd = app.add_subcommand("simulate", "run one configuration");
  add_common(sim_cmd, o);
  sim_cmd->add_option("--config", config_name, "baseline|archopt|il|mbs-fs|mbs1|mbs2");
  sim_cmd->add_option("--energy", o.energy_file, "energy model file");
  sim_cmd->add_option("--dump-schedule", dump_schedule, "write the layer grouping here");

  auto* cmp_cmd = app.add_subcommand("compare", "run all six configurations");
  add_common(cmp_cmd, o);
  cmp_cmd->add_option("--energy", o.energy_file, "energy model file");

  auto* swb_cmd = app.add_subcommand("sweep-buffer", "global buffer size sensitivity");
  add_common(swb_cmd, o);
  swb_cmd->add_option("--config", config_name, "configuration to sweep");
  swb_cmd->add_option("--sizes-mib", buffer_sizes, "buffer sizes in MiB");
  swb_cmd->add_option("--energy", o.energy_file, "energy model file");

  auto* swm_cmd = app.add_subcommand("sweep-memory", "memory system sensitivity");
  add_common(swm_cmd, o, false);
  swm_cmd->add_option("--config", config_name, "configuration to sweep");
  swm_cmd->add_option("--mems", mem_list, "memory presets or files");
  swm_cmd->add_option("--energy", o.energy_file, "energy model file");

  auto* ver_cmd = app.add_subcommand("verify-equivalence",
                                     "serialized vs full mini-batch gradient check");
  int64_t ver_batch = 8;
  int seeds = 5;
  ver_cmd->add_option("--batch", ver_batch, "mini-batch size");
  ver_cmd->add_option("--seeds", seeds, "number of seeded networks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ver_cmd->parsed()) {
      double worst = 0.0;
      for (int seed = 1; seed <= seeds; ++seed) {
        ref::TinyNet full = ref::make_random_net(static_cast<uint64_t>(seed), 3, 8, 10, 2);
        ref::TinyNet ser = full;
        ref::Tensor4 batch = ref::make_random_batch(static_cast<uint64_t>(seed), ver_batch, 3, 8);
        std::vector<int> labels = ref::make_random_labels(static_cast<uint64_t>(seed), ver_batch, 10);
        full.zero_grads();
        double lf = ref::train_step_full(full, batch, labels).loss;
        for (int64_t sb : {int64_t{1}, int64_t{2}, int64_t{3}, ver_batch}) {
          ser.zero_grads();
          double ls = ref::train_step_serialized(ser, batch, labels, sb).loss;
          double gap = ref::max_relative_grad_gap(full, ser);
          worst = std::max(worst, gap);
          std::cout << "seed " << seed << " sub_batch " << sb << ": loss gap "
                    << std::abs(lf - ls) << ", grad rel gap " << gap << "\n";
        }
      }
      std::cout << "max relative gradient gap: " << worst << "\n";
      return worst < 1e-9 ? 0 : 1;
    }

    NetworkGraph net = resolve_network(o.network);
    AcceleratorConfig accel = resolve_accel(o);
    EnergyModel energy = resolve_energy(o);

    if (sim_cmd->parsed()) {
      MemoryConfig mem = resolve_memory(o.mem, o.unlimited_bandwidth);
      ExecConfig cfg = exec_config_from_string(config_name);
      SimReport r = simulate_config(net, accel, mem, energy, o.mini_batch, cfg);
      if (!dump_schedule.empty()) write_file(dump_schedule, export_schedule(net, r.schedule));
      if (!o.out_json.empty()) write_file(o.out_json, report_json({r}));
      if (!o.out_csv.empty()) write_file(o.out_csv, per_layer_csv(net, r));
      std::cout << "network " << r.network << " config " << to_string(r.config) << " mem "
                << r.memory << "\n"
                << "  dram bytes " << r.dram.total() << "\n"
                << "  wall cycles " << r.wall_cycles << " (" << r.seconds * 1e3 << " ms)\n"
                << "  conv/fc utilization " << r.utilization_convfc << "\n"
                << "  energy " << r.energy.total() << " J\n";
    } else if (cmp_cmd->parsed()) {
      MemoryConfig mem = resolve_memory(o.mem, o.unlimited_bandwidth);
      auto reports = compare_configs(net, accel, mem, energy, o.mini_batch);
      if (!o.out_json.empty()) write_file(o.out_json, report_json(reports));
      if (!o.out_csv.empty()) write_file(o.out_csv, comparison_csv(reports));
      std::cout << comparison_csv(reports);
    } else if (swb_cmd->parsed()) {
      MemoryConfig mem = resolve_memory(o.mem, o.unlimited_bandwidth);
      ExecConfig cfg = exec_config_from_string(config_name);
      std::vector<int64_t> sizes;
      for (const auto& s : buffer_sizes) sizes.push_back(parse_mib(s));
      auto rows = sweep_buffer(net, accel, mem, energy, o.mini_batch, cfg, sizes);
      if (!o.out_json.empty()) {
        std::vector<SimReport> rs;
        for (auto& row : rows) rs.push_back(row.report);
        write_file(o.out_json, report_json(rs));
      }
      std::string csv = buffer_sweep_csv(rows);
      if (!o.out_csv.empty()) write_file(o.out_csv, csv);
      std::cout << csv;
    } else if (swm_cmd->parsed()) {
      ExecConfig cfg = exec_config_from_string(config_name);
      std::vector<MemoryConfig> mems;
      for (const auto& m : mem_list) mems.push_back(resolve_memory(m, o.unlimited_bandwidth));
      auto reports = sweep_memory(net, accel, energy, o.mini_batch, cfg, mems);
      if (!o.out_json.empty()) write_file(o.out_json, report_json(reports));
      std::string csv = memory_sweep_csv(reports);
      if (!o.out_csv.empty()) write_file(o.out_csv, csv);
      std::cout << csv;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
