#include "wavesim/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace wavesim {

namespace {

constexpr double kGiB = 1073741824.0;

std::map<std::string, std::string> read_keyvals(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(f, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key, eq, value;
    if (!(ls >> key)) continue;
    if (!(ls >> eq >> value) || eq != "=")
      throw Error(path + ": expected 'key = value', got '" + line + "'");
    kv[key] = value;
  }
  return kv;
}

int64_t geti(std::map<std::string, std::string>& kv, const std::string& k, int64_t def) {
  auto it = kv.find(k);
  return it == kv.end() ? def : std::stoll(it->second);
}

double getd(std::map<std::string, std::string>& kv, const std::string& k, double def) {
  auto it = kv.find(k);
  return it == kv.end() ? def : std::stod(it->second);
}

}  // namespace

AcceleratorConfig load_accelerator_file(const std::string& path) {
  auto kv = read_keyvals(path);
  AcceleratorConfig a;
  a.array.pe_rows = geti(kv, "pe_rows", a.array.pe_rows);
  a.array.pe_cols = geti(kv, "pe_cols", a.array.pe_cols);
  a.array.a_half_buffer = geti(kv, "a_half_buffer_bytes", a.array.a_half_buffer);
  a.array.b_half_buffer = geti(kv, "b_half_buffer_bytes", a.array.b_half_buffer);
  a.array.accum_buffer = geti(kv, "accum_buffer_bytes", a.array.accum_buffer);
  a.global_buffer_bytes = geti(kv, "global_buffer_bytes", a.global_buffer_bytes);
  a.reserve_bytes = geti(kv, "reserve_bytes", a.reserve_bytes);
  a.clock_hz = getd(kv, "clock_hz", a.clock_hz);
  a.vector_bytes_per_cycle = getd(kv, "vector_bytes_per_cycle", a.vector_bytes_per_cycle);
  a.precision.feature_bits = static_cast<int>(geti(kv, "feature_bits", a.precision.feature_bits));
  a.precision.weight_bits = static_cast<int>(geti(kv, "weight_bits", a.precision.weight_bits));
  a.precision.accum_bits = static_cast<int>(geti(kv, "accum_bits", a.precision.accum_bits));
  a.precision.relu_grad_bits =
      static_cast<int>(geti(kv, "relu_grad_bits", a.precision.relu_grad_bits));
  a.array.feature_bytes = a.precision.feature_bits / 8;
  a.precision.validate();
  a.array.validate();
  return a;
}

MemoryConfig memory_preset(const std::string& name) {
  MemoryConfig m;
  m.name = name;
  if (name == "hbm2") {
    m.bandwidth_bytes_per_s = 300.0 * kGiB;
    m.capacity_bytes = static_cast<int64_t>(8 * kGiB);
    m.channels = 8;
  } else if (name == "hbm2x2") {
    m.bandwidth_bytes_per_s = 600.0 * kGiB;
    m.capacity_bytes = static_cast<int64_t>(16 * kGiB);
    m.channels = 16;
  } else if (name == "gddr5") {
    m.bandwidth_bytes_per_s = 12 * 32.0 * kGiB;
    m.capacity_bytes = static_cast<int64_t>(12 * kGiB);
    m.channels = 12;
  } else if (name == "lpddr4") {
    m.bandwidth_bytes_per_s = 8 * 29.9 * kGiB;
    m.capacity_bytes = static_cast<int64_t>(16 * kGiB);
    m.channels = 8;
  } else {
    throw Error("unknown memory preset '" + name + "' (hbm2|hbm2x2|gddr5|lpddr4)");
  }
  return m;
}

bool is_memory_preset(const std::string& name) {
  return name == "hbm2" || name == "hbm2x2" || name == "gddr5" || name == "lpddr4";
}

MemoryConfig load_memory_file(const std::string& path) {
  auto kv = read_keyvals(path);
  MemoryConfig m;
  auto it = kv.find("preset");
  if (it != kv.end()) m = memory_preset(it->second);
  if (kv.count("name")) m.name = kv["name"];
  m.bandwidth_bytes_per_s = getd(kv, "bandwidth_bytes_per_s", m.bandwidth_bytes_per_s);
  m.capacity_bytes = geti(kv, "capacity_bytes", m.capacity_bytes);
  m.channels = static_cast<int>(geti(kv, "channels", m.channels));
  m.efficiency = getd(kv, "efficiency", m.efficiency);
  if (m.efficiency <= 0.0 || m.efficiency > 1.0) throw Error(path + ": efficiency must be in (0,1]");
  return m;
}

EnergyModel load_energy_file(const std::string& path) {
  auto kv = read_keyvals(path);
  EnergyModel e;
  e.e_mac_pj = getd(kv, "e_mac_pj", e.e_mac_pj);
  e.e_dram_pj_per_byte = getd(kv, "e_dram_pj_per_byte", e.e_dram_pj_per_byte);
  e.e_gbuf_pj_per_byte = getd(kv, "e_gbuf_pj_per_byte", e.e_dram_pj_per_byte / 8.0);
  e.e_lbuf_pj_per_byte = getd(kv, "e_lbuf_pj_per_byte", e.e_lbuf_pj_per_byte);
  e.p_static_w = getd(kv, "p_static_w", e.p_static_w);
  e.zero_operand_fraction = getd(kv, "zero_operand_fraction", e.zero_operand_fraction);
  if (e.zero_operand_fraction < 0.0 || e.zero_operand_fraction >= 1.0)
    throw Error(path + ": zero_operand_fraction must be in [0,1)");
  return e;
}

}  // namespace wavesim
