#include "wavesim/report.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace wavesim {

namespace {

using nlohmann::json;

json ledger_json(const TrafficLedger& l) {
  return json{{"features_in", l.features_in},
              {"features_out", l.features_out},
              {"weights", l.weights},
              {"weight_grad_rw", l.weight_grad_rw},
              {"checkpoints_fwd_write", l.checkpoints_fwd_write},
              {"checkpoints_bwd_read", l.checkpoints_bwd_read},
              {"relu_grad_bits", l.relu_grad_bits},
              {"norm_params", l.norm_params},
              {"total", l.total()}};
}

json report_to_json(const SimReport& r) {
  json groups = json::array();
  for (const auto& g : r.schedule.groups)
    groups.push_back(json{{"sub_batch", g.sub_batch},
                          {"iterations", g.iterations},
                          {"footprint_per_sample", g.footprint_per_sample},
                          {"units", g.members.size()}});
  return json{{"network", r.network},
              {"config", to_string(r.config)},
              {"memory", r.memory},
              {"mini_batch", r.mini_batch},
              {"dram_bytes", ledger_json(r.dram)},
              {"gbuf_bytes", r.gbuf_bytes},
              {"lbuf_bytes", r.lbuf_bytes},
              {"total_macs", r.total_macs},
              {"compute_cycles", r.compute_cycles},
              {"memory_cycles", r.memory_cycles},
              {"wall_cycles", r.wall_cycles},
              {"seconds", r.seconds},
              {"utilization_convfc", r.utilization_convfc},
              {"energy_j",
               json{{"mac", r.energy.mac_j},
                    {"dram", r.energy.dram_j},
                    {"gbuf", r.energy.gbuf_j},
                    {"lbuf", r.energy.lbuf_j},
                    {"static", r.energy.static_j},
                    {"total", r.energy.total()}}},
              {"groups", groups}};
}

}  // namespace

std::string report_json(const std::vector<SimReport>& reports) {
  json out = json::array();
  for (const auto& r : reports) out.push_back(report_to_json(r));
  return out.dump(2) + "\n";
}

std::string per_layer_csv(const NetworkGraph& net, const SimReport& r) {
  std::ostringstream os;
  os << "network,config,layer,kind,phase,dram_bytes,compute_cycles,memory_cycles,"
        "wall_cycles,macs,utilization\n";
  auto rows = [&](const std::vector<LayerTiming>& v, const char* phase) {
    for (const auto& t : v) {
      const LayerNode& l = net.layer(t.layer);
      os << r.network << ',' << to_string(r.config) << ',' << l.name << ',' << to_string(l.kind)
         << ',' << phase << ',' << t.dram_bytes << ',' << t.compute_cycles << ','
         << t.memory_cycles << ',' << t.wall_cycles << ',' << t.macs << ',' << t.utilization
         << '\n';
    }
  };
  rows(r.fwd_layers, "forward");
  rows(r.bwd_layers, "backward");
  return os.str();
}

std::string comparison_csv(const std::vector<SimReport>& reports) {
  const SimReport* base = nullptr;
  const SimReport* arch = nullptr;
  for (const auto& r : reports) {
    if (r.config == ExecConfig::Baseline) base = &r;
    if (r.config == ExecConfig::ArchOpt) arch = &r;
  }
  std::ostringstream os;
  os << "network,config,dram_bytes,wall_cycles,seconds,energy_j,utilization_convfc,"
        "dram_vs_baseline,time_vs_baseline,time_vs_archopt,energy_vs_baseline\n";
  for (const auto& r : reports) {
    auto rel = [](double v, const SimReport* ref, double refv) {
      return ref ? v / refv : 0.0;
    };
    os << r.network << ',' << to_string(r.config) << ',' << r.dram.total() << ','
       << r.wall_cycles << ',' << r.seconds << ',' << r.energy.total() << ','
       << r.utilization_convfc << ','
       << rel(static_cast<double>(r.dram.total()), base,
              base ? static_cast<double>(base->dram.total()) : 1.0)
       << ','
       << rel(static_cast<double>(r.wall_cycles), base,
              base ? static_cast<double>(base->wall_cycles) : 1.0)
       << ','
       << rel(static_cast<double>(r.wall_cycles), arch,
              arch ? static_cast<double>(arch->wall_cycles) : 1.0)
       << ',' << rel(r.energy.total(), base, base ? base->energy.total() : 1.0) << '\n';
  }
  return os.str();
}

std::string buffer_sweep_csv(const std::vector<BufferSweepRow>& rows) {
  std::ostringstream os;
  os << "network,config,buffer_bytes,dram_bytes,wall_cycles,seconds\n";
  for (const auto& row : rows)
    os << row.report.network << ',' << to_string(row.report.config) << ',' << row.buffer_bytes
       << ',' << row.report.dram.total() << ',' << row.report.wall_cycles << ','
       << row.report.seconds << '\n';
  return os.str();
}

std::string memory_sweep_csv(const std::vector<SimReport>& reports) {
  std::ostringstream os;
  os << "network,config,memory,dram_bytes,wall_cycles,seconds\n";
  for (const auto& r : reports)
    os << r.network << ',' << to_string(r.config) << ',' << r.memory << ',' << r.dram.total()
       << ',' << r.wall_cycles << ',' << r.seconds << '\n';
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write file: " + path);
  f << content;
}

}  // namespace wavesim
