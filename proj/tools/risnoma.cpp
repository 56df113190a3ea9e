// risnoma: Monte-Carlo drivers for the RIS-NOMA-ISAC beampattern optimizer.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "risnoma/errors.hpp"
#include "risnoma/experiments.hpp"

namespace fs = std::filesystem;
using namespace risnoma;

namespace {

struct Options {
  std::string config_path;
  std::string profile = "desk";
  int seeds = 0;
  std::vector<std::uint64_t> seed_list;
  int workers = 1;
  std::string out = "out";
  bool plot = false;
  std::vector<int> m_list;
  std::uint64_t seed = 0;
  std::string system = "noma";
  int nx = 101;
  int ny = 51;
};

SystemConfig resolve_config(const Options& o) {
  return o.config_path.empty() ? profile_config(o.profile) : load_config(o.config_path);
}

std::vector<std::uint64_t> resolve_seeds(const Options& o, const SystemConfig& c) {
  if (!o.seed_list.empty()) return o.seed_list;
  std::vector<std::uint64_t> s(o.seeds > 0 ? o.seeds : c.seeds);
  std::iota(s.begin(), s.end(), 0);
  return s;
}

std::vector<int> resolve_m_list(const Options& o, const SystemConfig& c) {
  if (!o.m_list.empty()) return o.m_list;
  if (!c.ris_sweep.empty()) return c.ris_sweep;
  return {c.n_ris};
}

const char* kPlotScripts[][2] = {
    {"beampattern",
     "import sys, pandas as pd, matplotlib\nmatplotlib.use('Agg')\nimport matplotlib.pyplot as plt\n"
     "d = pd.read_csv(sys.argv[1], comment='#')\n"
     "for c in d.columns[2:]: plt.plot(d.angle_deg, d[c], label=c)\n"
     "plt.fill_between(d.angle_deg, 0, d.desired, alpha=0.15, label='desired')\n"
     "plt.xlabel('angle (deg)'); plt.ylabel('normalized gain'); plt.legend()\n"
     "plt.savefig(sys.argv[2], dpi=150)\n"},
    {"sweep_m",
     "import sys, pandas as pd, matplotlib\nmatplotlib.use('Agg')\nimport matplotlib.pyplot as plt\n"
     "d = pd.read_csv(sys.argv[1], comment='#')\n"
     "plt.errorbar(d.M, d.mean_noma, d.ci95_noma, marker='o', label='NOMA-ISAC')\n"
     "plt.errorbar(d.M, d.mean_baseline, d.ci95_baseline, marker='s', label='RIS-ISAC')\n"
     "plt.xlabel('M'); plt.ylabel('min beampattern gain'); plt.legend()\n"
     "plt.savefig(sys.argv[2], dpi=150)\n"},
    {"heatmap",
     "import sys, pandas as pd, matplotlib\nmatplotlib.use('Agg')\nimport matplotlib.pyplot as plt\n"
     "d = pd.read_csv(sys.argv[1], comment='#', index_col=0)\n"
     "x = [float(c) for c in d.columns]; y = list(d.index)\n"
     "plt.pcolormesh(x, y, d.values, shading='auto'); plt.colorbar()\n"
     "plt.xlabel('x (m)'); plt.ylabel('y (m)')\n"
     "plt.savefig(sys.argv[2], dpi=150)\n"},
};

void write_table(const Options& o, const std::string& name, const CsvTable& table) {
  fs::create_directories(o.out);
  const fs::path csv = fs::path(o.out) / (name + ".csv");
  std::ofstream(csv, std::ios::binary) << table.str();
  std::cout << csv.string() << "\n";
  if (!o.plot) return;
  for (const auto& entry : kPlotScripts) {
    if (name != entry[0]) continue;
    const fs::path script = fs::path(o.out) / ("plot_" + name + ".py");
    const fs::path png = fs::path(o.out) / (name + ".png");
    std::ofstream(script) << entry[1];
    const std::string cmd =
        "python3 '" + script.string() + "' '" + csv.string() + "' '" + png.string() + "'";
    if (std::system(cmd.c_str()) != 0)
      std::cerr << "warning: plotting failed; CSV written to " << csv.string() << "\n";
    else
      std::cout << png.string() << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RIS-assisted NOMA-ISAC max-min beampattern optimizer"};
  app.require_subcommand(1);
  Options o;
  auto* cfg_opt = app.add_option("--config", o.config_path, "JSON config file")
                      ->check(CLI::ExistingFile);
  app.add_option("--profile", o.profile, "built-in profile when no config is given")
      ->check(CLI::IsMember({"desk", "paper"}))
      ->excludes(cfg_opt);
  auto* seeds_opt = app.add_option("--seeds", o.seeds, "run seeds 0..N-1")
                        ->check(CLI::PositiveNumber);
  app.add_option("--seed-list", o.seed_list, "explicit seeds")->delimiter(',')->excludes(seeds_opt);
  app.add_option("--workers", o.workers, "parallel trials")->check(CLI::PositiveNumber);
  app.add_option("--out", o.out, "output directory");
  app.add_flag("--plot", o.plot, "also render PNG figures (needs matplotlib)");
  app.add_option("--m-list", o.m_list, "RIS sizes to sweep")->delimiter(',');

  auto* run = app.add_subcommand("run", "one trial, JSON result on stdout");
  run->add_option("--seed", o.seed, "trial seed");
  run->add_option("--system", o.system)->check(CLI::IsMember({"noma", "baseline"}));
  auto* beampattern = app.add_subcommand("beampattern", "normalized beampattern per RIS size");
  auto* sweep = app.add_subcommand("sweep-m", "min gain vs RIS size, NOMA and baseline");
  auto* heatmap = app.add_subcommand("heatmap", "illumination map of one trial");
  heatmap->add_option("--seed", o.seed, "trial seed");
  heatmap->add_option("--nx", o.nx, "grid columns")->check(CLI::PositiveNumber);
  heatmap->add_option("--ny", o.ny, "grid rows")->check(CLI::PositiveNumber);
  auto* baseline = app.add_subcommand("baseline", "per-seed RIS-ISAC baseline results");

  CLI11_PARSE(app, argc, argv);

  try {
    const SystemConfig config = resolve_config(o);
    if (run->parsed()) {
      const TrialRecord r = o.system == "noma" ? run_noma_trial(config, o.seed)
                                               : run_baseline_trial(config, o.seed);
      std::cout << trial_json(config, r) << "\n";
      return r.ok ? 0 : 1;
    }
    const auto seeds = resolve_seeds(o, config);
    if (beampattern->parsed()) {
      const auto m = resolve_m_list(o, config);
      write_table(o, "beampattern", beampattern_table(config, m, seeds, o.workers));
    } else if (sweep->parsed()) {
      const auto m = resolve_m_list(o, config);
      write_table(o, "sweep_m", sweep_table(config, m, seeds, o.workers));
    } else if (heatmap->parsed()) {
      HeatmapWindow w;
      w.nx = o.nx;
      w.ny = o.ny;
      write_table(o, "heatmap", heatmap_table(config, o.seed, w));
    } else if (baseline->parsed()) {
      write_table(o, "baseline", baseline_table(config, seeds, o.workers));
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
