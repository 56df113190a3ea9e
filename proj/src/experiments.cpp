#include "risnoma/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "risnoma/errors.hpp"

#ifndef RISNOMA_VERSION
#define RISNOMA_VERSION "0.1.0"
#endif

namespace risnoma {

namespace {

using nlohmann::json;

constexpr double kDeg = std::numbers::pi / 180.0;

double watt_to_dbm(double w) { return 10.0 * std::log10(w * 1e3); }

// Reads keys out of one JSON object, rejecting leftovers.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& require(const std::string& key) {
    if (!j_.contains(key)) throw ConfigError(where_ + ": missing key '" + key + "'");
    seen_.push_back(key);
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = require(key);
    if (!v.is_number()) throw ConfigError(where_ + ": '" + key + "' must be a number");
    return v.get<double>();
  }

  int integer(const std::string& key) {
    const json& v = require(key);
    if (!v.is_number_integer()) throw ConfigError(where_ + ": '" + key + "' must be an integer");
    return v.get<int>();
  }

  std::vector<double> numbers(const std::string& key) {
    const json& v = require(key);
    if (!v.is_array()) throw ConfigError(where_ + ": '" + key + "' must be an array");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigError(where_ + ": '" + key + "' must hold numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  Interval interval(const std::string& key) {
    const auto v = numbers(key);
    if (v.size() != 2) throw ConfigError(where_ + ": '" + key + "' must be [lo, hi]");
    return {v[0], v[1]};
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end())
        throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::vector<std::string> seen_;
};

void read_controls(const json& j, SolverControls& c) {
  ObjectReader r(j, "solver");
  auto num = [&](const char* key, double& field) {
    if (r.has(key)) field = r.number(key);
  };
  auto whole = [&](const char* key, int& field) {
    if (r.has(key)) field = r.integer(key);
  };
  num("sca_tol", c.sca_tol);
  num("srcr_rank_tol", c.srcr_rank_tol);
  num("srcr_obj_tol", c.srcr_obj_tol);
  num("outer_tol", c.outer_tol);
  whole("t1_max", c.t1_max);
  whole("t2_max", c.t2_max);
  whole("t3_max", c.t3_max);
  num("srcr_step", c.srcr_step);
  num("srcr_stall", c.srcr_stall);
  num("power_split_margin", c.power_split_margin);
  num("initial_near_split", c.initial_near_split);
  num("conic_tol", c.conic_tol);
  whole("conic_max_iter", c.conic_max_iter);
  r.finish();
}

json controls_json(const SolverControls& c) {
  return json{{"sca_tol", c.sca_tol},
              {"srcr_rank_tol", c.srcr_rank_tol},
              {"srcr_obj_tol", c.srcr_obj_tol},
              {"outer_tol", c.outer_tol},
              {"t1_max", c.t1_max},
              {"t2_max", c.t2_max},
              {"t3_max", c.t3_max},
              {"srcr_step", c.srcr_step},
              {"srcr_stall", c.srcr_stall},
              {"power_split_margin", c.power_split_margin},
              {"initial_near_split", c.initial_near_split},
              {"conic_tol", c.conic_tol},
              {"conic_max_iter", c.conic_max_iter}};
}

std::vector<double> scaled(const std::vector<double>& v, double s) {
  std::vector<double> out;
  for (double x : v) out.push_back(x * s);
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double ci95_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  return 1.96 * sd / std::sqrt(static_cast<double>(v.size()));
}

std::vector<double> grid_gains(const CMatrix& V, std::span<const CMatrix> W, const CMatrix& G,
                               const AngleGrid& grid, double spacing) {
  std::vector<double> out;
  for (double theta : grid.grid) out.push_back(beampattern_gain(V, W, G, theta, spacing));
  return out;
}

std::string seed_list(std::span<const std::uint64_t> seeds) {
  std::string s;
  for (std::size_t i = 0; i < seeds.size(); ++i) s += (i ? "," : "") + std::to_string(seeds[i]);
  return s;
}

}  // namespace

SystemConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ObjectReader r(j, "config");
  SystemConfig c;
  c.n_tx = r.integer("n_tx");
  c.n_ris = r.integer("n_ris");
  c.n_clusters = r.integer("n_clusters");
  c.users_per_cluster = r.integer("users_per_cluster");
  c.p_max = dbm_to_watt(r.number("p_max_dbm"));
  c.noise_power = dbm_to_watt(r.number("noise_power_dbm"));
  c.r_min_near = r.number("r_min_near");
  c.r_min_far = r.number("r_min_far");
  c.spacing_ratio = r.number("spacing_ratio");
  c.pathloss_ref = db_to_linear(r.number("pathloss_ref_db"));
  {
    ObjectReader e(r.require("pathloss_exponent"), "pathloss_exponent");
    c.pathloss_exp.bs_ris = e.number("bs_ris");
    c.pathloss_exp.ris_near = e.number("ris_near");
    c.pathloss_exp.ris_far = e.number("ris_far");
    c.pathloss_exp.ris_point = e.number("ris_point");
    e.finish();
  }
  c.rician_k = r.number("rician_k");
  c.target_angles = scaled(r.numbers("target_angles_deg"), kDeg);
  c.target_radii = r.numbers("target_radii");
  c.beam_width = r.number("beam_width_deg") * kDeg;
  c.angle_grid_points = r.integer("angle_grid_points");
  {
    const auto bs = r.numbers("bs_position");
    if (bs.size() != 2) throw ConfigError("config: 'bs_position' must be [x, y]");
    c.bs_position = {bs[0], bs[1]};
  }
  c.near_radius = r.interval("near_radius");
  c.far_radius = r.interval("far_radius");
  {
    const json& ranges = r.require("cluster_angles_deg");
    if (!ranges.is_array()) throw ConfigError("config: 'cluster_angles_deg' must be an array");
    for (const auto& x : ranges) {
      if (!x.is_array() || x.size() != 2 || !x[0].is_number() || !x[1].is_number())
        throw ConfigError("config: 'cluster_angles_deg' entries must be [lo, hi]");
      c.cluster_angle_ranges.push_back({x[0].get<double>() * kDeg, x[1].get<double>() * kDeg});
    }
  }
  {
    const json& sweep = r.require("ris_sweep");
    if (!sweep.is_array()) throw ConfigError("config: 'ris_sweep' must be an array");
    for (const auto& x : sweep) {
      if (!x.is_number_integer()) throw ConfigError("config: 'ris_sweep' must hold integers");
      c.ris_sweep.push_back(x.get<int>());
    }
  }
  {
    const json& seed = r.require("rng_seed");
    if (!seed.is_number_unsigned()) throw ConfigError("config: 'rng_seed' must be >= 0");
    c.rng_seed = seed.get<std::uint64_t>();
  }
  c.seeds = r.integer("seeds");
  if (r.has("solver")) read_controls(r.require("solver"), c.controls);
  r.finish();
  c.validate();
  return c;
}

SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string canonical_config(const SystemConfig& c) {
  json ranges = json::array();
  for (const auto& r : c.cluster_angle_ranges) ranges.push_back({r.lo / kDeg, r.hi / kDeg});
  const json j{
      {"n_tx", c.n_tx},
      {"n_ris", c.n_ris},
      {"n_clusters", c.n_clusters},
      {"users_per_cluster", c.users_per_cluster},
      {"p_max_dbm", watt_to_dbm(c.p_max)},
      {"noise_power_dbm", watt_to_dbm(c.noise_power)},
      {"r_min_near", c.r_min_near},
      {"r_min_far", c.r_min_far},
      {"spacing_ratio", c.spacing_ratio},
      {"pathloss_ref_db", 10.0 * std::log10(c.pathloss_ref)},
      {"pathloss_exponent",
       {{"bs_ris", c.pathloss_exp.bs_ris},
        {"ris_near", c.pathloss_exp.ris_near},
        {"ris_far", c.pathloss_exp.ris_far},
        {"ris_point", c.pathloss_exp.ris_point}}},
      {"rician_k", c.rician_k},
      {"target_angles_deg", scaled(c.target_angles, 1.0 / kDeg)},
      {"target_radii", c.target_radii},
      {"beam_width_deg", c.beam_width / kDeg},
      {"angle_grid_points", c.angle_grid_points},
      {"bs_position", {c.bs_position.x, c.bs_position.y}},
      {"near_radius", {c.near_radius.lo, c.near_radius.hi}},
      {"far_radius", {c.far_radius.lo, c.far_radius.hi}},
      {"cluster_angles_deg", ranges},
      {"ris_sweep", c.ris_sweep},
      {"rng_seed", c.rng_seed},
      {"seeds", c.seeds},
      {"solver", controls_json(c.controls)}};
  return j.dump(2);
}

std::string config_hash(const SystemConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string version_string() { return RISNOMA_VERSION; }

TrialRecord run_noma_trial(const SystemConfig& config, std::uint64_t seed) {
  TrialRecord rec;
  rec.seed = seed;
  rec.n_ris = config.n_ris;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const auto scenario = build_scenario(config, seed);
    const ChannelSet& ch = scenario.second;
    const JointResult res = algorithm3(ch, config, seed);
    const AngleGrid grid = make_angle_grid(config);
    rec.chi = res.chi;
    rec.gains = grid_gains(res.state.V, res.state.W, ch.G, grid, config.spacing_ratio);
    const RateReport report = rate_report(res.state, ch, config);
    for (const auto& c : report.clusters) rec.user_rates.push_back(c.near);
    for (const auto& c : report.clusters) rec.user_rates.push_back(c.far);
    rec.qos_margin = qos_margin(report, config);
    rec.outer_trace = res.outer_trace;
    rec.diagnostics = res.diagnostics;
    rec.ok = true;
  } catch (const Error& e) {
    rec.error = e.what();
  }
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

TrialRecord run_baseline_trial(const SystemConfig& config, std::uint64_t seed) {
  TrialRecord rec;
  rec.seed = seed;
  rec.n_ris = config.n_ris;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const auto scenario = build_scenario(config, seed);
    const ChannelSet& ch = scenario.second;
    const BaselineResult res = baseline_ris_isac(ch, config, seed);
    const AngleGrid grid = make_angle_grid(config);
    rec.chi = res.chi;
    rec.gains = grid_gains(res.design.V, res.design.W, ch.G, grid, config.spacing_ratio);
    const auto users = ch.all_users();
    const auto sinr = baseline_sinr(res.design, ch.G, users, config.noise_power);
    rec.qos_margin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < sinr.size(); ++j) {
      const double rate = std::log2(1.0 + sinr[j]);
      const double floor =
          static_cast<int>(j) < ch.n_clusters() ? config.r_min_near : config.r_min_far;
      rec.user_rates.push_back(rate);
      rec.qos_margin = std::min(rec.qos_margin, rate - floor);
    }
    rec.outer_trace = res.outer_trace;
    rec.diagnostics = res.diagnostics;
    rec.ok = true;
  } catch (const Error& e) {
    rec.error = e.what();
  }
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

std::vector<TrialRecord> run_trials(const SystemConfig& config,
                                    std::span<const std::uint64_t> seeds, int workers,
                                    System system) {
  std::vector<TrialRecord> out(seeds.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++)
      out[i] = system == System::kNoma ? run_noma_trial(config, seeds[i])
                                       : run_baseline_trial(config, seeds[i]);
  };
  const int n = std::clamp(workers, 1, std::max(1, static_cast<int>(seeds.size())));
  if (n == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const TrialRecord& a, const TrialRecord& b) { return a.seed < b.seed; });
  return out;
}

std::string CsvTable::str() const {
  std::string s;
  for (const auto& m : meta) s += "# " + m + "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) s += (i ? "," : "") + columns[i];
  s += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + row[i];
    s += "\n";
  }
  return s;
}

std::string format_number(double x) {
  if (x == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::vector<std::string> table_meta(const SystemConfig& config, const std::string& command,
                                    std::span<const std::uint64_t> seeds) {
  return {"risnoma " + version_string(), "command " + command,
          "config_hash " + config_hash(config), "seeds " + seed_list(seeds)};
}

CsvTable beampattern_table(const SystemConfig& config, std::span<const int> m_list,
                           std::span<const std::uint64_t> seeds,
                           const std::vector<std::vector<TrialRecord>>& records) {
  if (records.size() != m_list.size()) throw ShapeError("one record set per RIS size");
  const AngleGrid grid = make_angle_grid(config);
  CsvTable t;
  t.meta = table_meta(config, "beampattern", seeds);
  t.columns = {"angle_deg", "desired"};
  std::vector<std::vector<double>> curves;
  for (std::size_t j = 0; j < m_list.size(); ++j) {
    const int m = m_list[j];
    std::vector<double> sum(grid.grid.size(), 0.0);
    int used = 0;
    for (const auto& r : records[j]) {
      if (!r.ok) continue;
      ++used;
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += r.gains[i];
    }
    const double peak = *std::max_element(sum.begin(), sum.end());
    if (peak > 0.0)
      for (double& x : sum) x /= peak;
    curves.push_back(sum);
    t.columns.push_back("gain_m" + std::to_string(m));
    t.meta.push_back("trials_m" + std::to_string(m) + " " + std::to_string(used) + "/" +
                     std::to_string(records[j].size()));
  }
  for (std::size_t i = 0; i < grid.grid.size(); ++i) {
    const double theta = grid.grid[i];
    std::vector<std::string> row{
        format_number(theta / kDeg),
        desired_beampattern(theta, config.target_angles, config.beam_width) ? "1" : "0"};
    for (const auto& c : curves) row.push_back(format_number(c[i]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable beampattern_table(const SystemConfig& config, std::span<const int> m_list,
                           std::span<const std::uint64_t> seeds, int workers) {
  std::vector<std::vector<TrialRecord>> records;
  for (int m : m_list) {
    SystemConfig c = config;
    c.n_ris = m;
    records.push_back(run_trials(c, seeds, workers, System::kNoma));
  }
  return beampattern_table(config, m_list, seeds, records);
}

CsvTable sweep_table(const SystemConfig& config, std::span<const int> m_list,
                     std::span<const std::uint64_t> seeds,
                     const std::vector<std::vector<TrialRecord>>& noma_records,
                     const std::vector<std::vector<TrialRecord>>& baseline_records) {
  if (noma_records.size() != m_list.size() || baseline_records.size() != m_list.size())
    throw ShapeError("one record set per RIS size");
  CsvTable t;
  t.meta = table_meta(config, "sweep-m", seeds);
  t.columns = {"M",           "mean_noma",    "ci95_noma", "mean_baseline",
               "ci95_baseline", "n_paired", "load"};
  const int streams = config.n_clusters * config.users_per_cluster;
  const std::string load = streams > config.n_tx ? "overloaded" : "underloaded";
  for (std::size_t j = 0; j < m_list.size(); ++j) {
    const auto& noma = noma_records[j];
    const auto& base = baseline_records[j];
    if (noma.size() != base.size()) throw ShapeError("NOMA and baseline runs are not paired");
    std::vector<double> xn;
    std::vector<double> xb;
    for (std::size_t i = 0; i < noma.size(); ++i) {
      if (!noma[i].ok || !base[i].ok) continue;
      xn.push_back(noma[i].chi);
      xb.push_back(base[i].chi);
    }
    t.rows.push_back({std::to_string(m_list[j]), format_number(mean_of(xn)),
                      format_number(ci95_of(xn)), format_number(mean_of(xb)),
                      format_number(ci95_of(xb)), std::to_string(xn.size()), load});
  }
  return t;
}

CsvTable sweep_table(const SystemConfig& config, std::span<const int> m_list,
                     std::span<const std::uint64_t> seeds, int workers) {
  std::vector<std::vector<TrialRecord>> noma;
  std::vector<std::vector<TrialRecord>> base;
  for (int m : m_list) {
    SystemConfig c = config;
    c.n_ris = m;
    noma.push_back(run_trials(c, seeds, workers, System::kNoma));
    base.push_back(run_trials(c, seeds, workers, System::kBaseline));
  }
  return sweep_table(config, m_list, seeds, noma, base);
}

CsvTable heatmap_table(const SystemConfig& config, std::uint64_t seed,
                       const HeatmapWindow& window) {
  const auto scenario = build_scenario(config, seed);
  const JointResult res = algorithm3(scenario.second, config, seed);
  const RMatrix map = illumination_heatmap(res.state, scenario.second, config, window);
  CsvTable t;
  const std::uint64_t seeds[] = {seed};
  t.meta = table_meta(config, "heatmap", seeds);
  t.columns.push_back("y");
  for (int i = 0; i < window.nx; ++i) t.columns.push_back(format_number(window.x(i)));
  for (int j = 0; j < window.ny; ++j) {
    std::vector<std::string> row{format_number(window.y(j))};
    for (int i = 0; i < window.nx; ++i) row.push_back(format_number(map(j, i)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable baseline_table(const SystemConfig& config, std::span<const std::uint64_t> seeds,
                        int workers) {
  CsvTable t;
  t.meta = table_meta(config, "baseline", seeds);
  t.columns = {"seed", "ok", "chi", "outer_iterations", "qos_margin"};
  for (const auto& r : run_trials(config, seeds, workers, System::kBaseline))
    t.rows.push_back({std::to_string(r.seed), r.ok ? "1" : "0", format_number(r.chi),
                      std::to_string(r.outer_trace.size()), format_number(r.qos_margin)});
  return t;
}

std::string trial_json(const SystemConfig& config, const TrialRecord& r) {
  const AngleGrid grid = make_angle_grid(config);
  json j{{"version", version_string()},
         {"config_hash", config_hash(config)},
         {"seed", r.seed},
         {"n_ris", r.n_ris},
         {"ok", r.ok},
         {"seconds", r.seconds}};
  if (!r.ok) {
    j["error"] = r.error;
    return j.dump(2);
  }
  const auto& d = r.diagnostics;
  j["chi"] = r.chi;
  j["angles_deg"] = scaled(grid.grid, 1.0 / kDeg);
  j["gains"] = r.gains;
  j["user_rates"] = r.user_rates;
  j["qos_margin"] = r.qos_margin;
  j["outer_trace"] = r.outer_trace;
  j["active_traces"] = d.active_traces;
  j["passive_traces"] = d.passive_traces;
  j["active_rank_ratios"] = d.active_rank_ratios;
  j["passive_rank_ratios"] = d.passive_rank_ratios;
  j["phase_fidelity"] = d.phase_fidelity;
  j["events"] = d.events;
  return j.dump(2);
}

}  // namespace risnoma
