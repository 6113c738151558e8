#include "wavesim/schedule.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "wavesim/traffic.hpp"

namespace wavesim {

const char* to_string(ExecConfig c) {
  switch (c) {
    case ExecConfig::Baseline: return "baseline";
    case ExecConfig::ArchOpt: return "archopt";
    case ExecConfig::IL: return "il";
    case ExecConfig::MbsFS: return "mbs-fs";
    case ExecConfig::Mbs1: return "mbs1";
    case ExecConfig::Mbs2: return "mbs2";
  }
  return "?";
}

ExecConfig exec_config_from_string(const std::string& s) {
  if (s == "baseline") return ExecConfig::Baseline;
  if (s == "archopt") return ExecConfig::ArchOpt;
  if (s == "il") return ExecConfig::IL;
  if (s == "mbs-fs" || s == "mbsfs") return ExecConfig::MbsFS;
  if (s == "mbs1") return ExecConfig::Mbs1;
  if (s == "mbs2") return ExecConfig::Mbs2;
  throw Error("unknown config '" + s + "' (expected baseline|archopt|il|mbs-fs|mbs1|mbs2)");
}

bool uses_groups(ExecConfig c) {
  return c == ExecConfig::MbsFS || c == ExecConfig::Mbs1 || c == ExecConfig::Mbs2;
}

bool uses_relu_masks(ExecConfig c) { return uses_groups(c); }

WaveMode wave_mode(ExecConfig c) {
  return c == ExecConfig::Baseline ? WaveMode::Gapped : WaveMode::DoubleBuffered;
}

FootprintMode footprint_mode(ExecConfig c) {
  return c == ExecConfig::Mbs2 ? FootprintMode::BlockReuse : FootprintMode::PlainLayer;
}

int MbsSchedule::group_of_layer(const NetworkGraph& net, int layer_id) const {
  for (size_t gi = 0; gi < groups.size(); ++gi)
    for (const Unit& u : groups[gi].members) {
      if (!u.is_block && u.index == layer_id) return static_cast<int>(gi);
      if (u.is_block) {
        const BlockNode& b = net.blocks()[static_cast<size_t>(u.index)];
        if (b.merge_layer == layer_id) return static_cast<int>(gi);
        for (const auto& br : b.branches)
          for (int lid : br)
            if (lid == layer_id) return static_cast<int>(gi);
      }
    }
  return -1;
}

int64_t MbsSchedule::total_iterations() const {
  int64_t sum = 0;
  for (const auto& g : groups) sum += g.iterations;
  return sum;
}

namespace {

int64_t ceil_div(int64_t a, int64_t b) { return (a + b - 1) / b; }

std::string unit_name(const NetworkGraph& net, const Unit& u) {
  return u.is_block ? net.blocks()[static_cast<size_t>(u.index)].name
                    : net.layer(u.index).name;
}

LayerGroup make_group(std::vector<Unit> members, const std::vector<int64_t>& unit_smax,
                      const std::vector<int64_t>& unit_fp, const std::vector<size_t>& idx,
                      int64_t mini_batch, int64_t budget) {
  LayerGroup g;
  g.members = std::move(members);
  g.buffer_budget = budget;
  int64_t s = mini_batch, fp = 0;
  for (size_t i : idx) {
    s = std::min(s, unit_smax[i]);
    fp = std::max(fp, unit_fp[i]);
  }
  g.sub_batch = std::min(s, mini_batch);
  g.iterations = ceil_div(mini_batch, g.sub_batch);
  g.footprint_per_sample = fp;
  return g;
}

}  // namespace

MbsSchedule build_schedule(const NetworkGraph& net, const ScheduleParams& sp, int64_t mini_batch,
                           ExecConfig config) {
  if (mini_batch < 1) throw Error("mini_batch must be >= 1");
  MbsSchedule sched;
  sched.config = config;
  sched.mini_batch = mini_batch;

  const auto& units = net.units();
  FootprintMode mode = footprint_mode(config);
  const int64_t budget = sp.budget();
  if (budget <= 0) throw Error("buffer budget is not positive after the reserve");

  std::vector<int64_t> fp(units.size()), smax(units.size());
  for (size_t i = 0; i < units.size(); ++i) {
    fp[i] = unit_footprint(net, units[i], mode, sp.precision);
    smax[i] = max_subbatch(fp[i], budget);
  }

  if (!uses_groups(config)) {
    // One group per unit at the full mini-batch; residency decisions are
    // made per layer by the traffic model.
    for (size_t i = 0; i < units.size(); ++i)
      sched.groups.push_back(make_group({units[i]}, smax, fp, {i}, mini_batch, budget));
    for (auto& g : sched.groups) {
      g.sub_batch = mini_batch;
      g.iterations = 1;
    }
    return sched;
  }

  for (size_t i = 0; i < units.size(); ++i)
    if (smax[i] < 1)
      throw Error("infeasible: unit '" + unit_name(net, units[i]) + "' needs " +
                  std::to_string(fp[i]) + " B/sample, budget " + std::to_string(budget));

  if (config == ExecConfig::MbsFS) {
    std::vector<size_t> all(units.size());
    for (size_t i = 0; i < units.size(); ++i) all[i] = i;
    sched.groups.push_back(make_group(units, smax, fp, all, mini_batch, budget));
    return sched;
  }

  // Initial grouping: maximal runs of units that need the same iteration count.
  std::vector<std::vector<size_t>> runs;
  for (size_t i = 0; i < units.size(); ++i) {
    int64_t iters = ceil_div(mini_batch, std::min(smax[i], mini_batch));
    if (!runs.empty()) {
      size_t prev = runs.back().front();
      int64_t prev_iters = ceil_div(mini_batch, std::min(smax[prev], mini_batch));
      if (prev_iters == iters) {
        runs.back().push_back(i);
        continue;
      }
    }
    runs.push_back({i});
  }
  auto realize = [&](const std::vector<std::vector<size_t>>& parts) {
    MbsSchedule cand = sched;
    for (const auto& part : parts) {
      std::vector<Unit> members;
      for (size_t i : part) members.push_back(units[i]);
      cand.groups.push_back(make_group(std::move(members), smax, fp, part, mini_batch, budget));
    }
    return cand;
  };

  MbsSchedule current = realize(runs);
  int64_t current_traffic = schedule_dram_traffic(net, current, sp);

  // Greedy merging: sweep adjacent boundaries left to right, accept any merge
  // that strictly lowers modeled DRAM traffic, repeat to a fixpoint.
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t b = 0; b + 1 < runs.size();) {
      std::vector<std::vector<size_t>> trial = runs;
      trial[b].insert(trial[b].end(), trial[b + 1].begin(), trial[b + 1].end());
      trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(b) + 1);
      MbsSchedule cand = realize(trial);
      int64_t t = schedule_dram_traffic(net, cand, sp);
      if (t < current_traffic) {
        runs = std::move(trial);
        current = std::move(cand);
        current_traffic = t;
        changed = true;
      } else {
        ++b;
      }
    }
  }
  return current;
}

std::string export_schedule(const NetworkGraph& net, const MbsSchedule& s) {
  std::ostringstream os;
  os << "schedule " << net.name() << " config=" << to_string(s.config)
     << " mini_batch=" << s.mini_batch << "\n";
  for (size_t gi = 0; gi < s.groups.size(); ++gi) {
    const LayerGroup& g = s.groups[gi];
    os << "group " << gi << " sub_batch=" << g.sub_batch << " iterations=" << g.iterations
       << " footprint=" << g.footprint_per_sample << " budget=" << g.buffer_budget
       << " members=";
    for (size_t i = 0; i < g.members.size(); ++i) {
      if (i) os << ",";
      os << unit_name(net, g.members[i]);
    }
    os << "\n";
  }
  return os.str();
}

MbsSchedule import_schedule(const NetworkGraph& net, const std::string& text) {
  std::map<std::string, Unit> by_name;
  for (const Unit& u : net.units()) by_name[unit_name(net, u)] = u;

  MbsSchedule s;
  std::istringstream is(text);
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string head;
    if (!(ls >> head)) continue;
    std::map<std::string, std::string> kv;
    std::string w, first;
    ls >> first;
    while (ls >> w) {
      auto eq = w.find('=');
      if (eq != std::string::npos) kv[w.substr(0, eq)] = w.substr(eq + 1);
    }
    if (head == "schedule") {
      s.config = exec_config_from_string(kv.at("config"));
      s.mini_batch = std::stoll(kv.at("mini_batch"));
      have_header = true;
    } else if (head == "group") {
      if (!have_header) throw Error("schedule file: group before header");
      LayerGroup g;
      g.sub_batch = std::stoll(kv.at("sub_batch"));
      g.iterations = std::stoll(kv.at("iterations"));
      g.footprint_per_sample = std::stoll(kv.at("footprint"));
      g.buffer_budget = std::stoll(kv.at("budget"));
      std::stringstream ms(kv.at("members"));
      std::string name;
      while (std::getline(ms, name, ',')) {
        auto it = by_name.find(name);
        if (it == by_name.end()) throw Error("schedule file: unknown unit '" + name + "'");
        g.members.push_back(it->second);
      }
      s.groups.push_back(std::move(g));
    }
  }
  if (!have_header) throw Error("schedule file: missing header");
  return s;
}

}  // namespace wavesim
