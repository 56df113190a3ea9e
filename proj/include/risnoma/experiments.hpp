#pragma once

// Config files, Monte-Carlo trial runners and the CSV tables behind the
// command-line tool.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "risnoma/comm_noma.hpp"
#include "risnoma/config.hpp"
#include "risnoma/joint_driver.hpp"
#include "risnoma/sensing.hpp"

namespace risnoma {

// JSON config with power in dBm, gains in dB and angles in degrees. Every
// scenario key is required; "solver" is optional and partial. Unknown keys
// are errors.
SystemConfig parse_config(const std::string& json_text);
SystemConfig load_config(const std::string& path);

// The config re-serialised in the file schema with sorted keys.
std::string canonical_config(const SystemConfig& config);

// FNV-1a 64 of the canonical form, as 16 hex digits.
std::string config_hash(const SystemConfig& config);

std::string version_string();

struct TrialRecord {
  std::uint64_t seed = 0;
  int n_ris = 0;
  bool ok = false;
  std::string error;
  double chi = 0.0;
  std::vector<double> gains;       // beampattern gain at every grid angle
  std::vector<double> user_rates;  // NOMA: RNUs then RFUs (min over decoders)
  double qos_margin = 0.0;         // worst rate minus its floor
  std::vector<double> outer_trace;
  OuterDiagnostics diagnostics;
  double seconds = 0.0;  // wall clock; kept out of the CSV tables
};

TrialRecord run_noma_trial(const SystemConfig& config, std::uint64_t seed);
TrialRecord run_baseline_trial(const SystemConfig& config, std::uint64_t seed);

enum class System { kNoma, kBaseline };

// Trials on a pool of `workers` threads; the result is ordered by seed.
std::vector<TrialRecord> run_trials(const SystemConfig& config,
                                    std::span<const std::uint64_t> seeds, int workers,
                                    System system);

struct CsvTable {
  std::vector<std::string> meta;  // written as "# key value" lines
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string str() const;
};

std::string format_number(double x);

// Header lines shared by every table.
std::vector<std::string> table_meta(const SystemConfig& config, const std::string& command,
                                    std::span<const std::uint64_t> seeds);

// Seed-averaged beampattern per RIS size, each curve scaled to peak 1, with
// the desired-beampattern mask.
CsvTable beampattern_table(const SystemConfig& config, std::span<const int> m_list,
                           std::span<const std::uint64_t> seeds, int workers);
// Same table from finished runs, records[j] belonging to m_list[j].
CsvTable beampattern_table(const SystemConfig& config, std::span<const int> m_list,
                           std::span<const std::uint64_t> seeds,
                           const std::vector<std::vector<TrialRecord>>& records);

// Mean min-gain with 95% intervals for NOMA and the baseline on paired
// channels. Only seeds where both systems are feasible enter the means.
CsvTable sweep_table(const SystemConfig& config, std::span<const int> m_list,
                     std::span<const std::uint64_t> seeds, int workers);
CsvTable sweep_table(const SystemConfig& config, std::span<const int> m_list,
                     std::span<const std::uint64_t> seeds,
                     const std::vector<std::vector<TrialRecord>>& noma_records,
                     const std::vector<std::vector<TrialRecord>>& baseline_records);

// Illumination map of one trial; first column is y, then one column per x.
CsvTable heatmap_table(const SystemConfig& config, std::uint64_t seed,
                       const HeatmapWindow& window);

// One row per seed for the baseline system.
CsvTable baseline_table(const SystemConfig& config, std::span<const std::uint64_t> seeds,
                        int workers);

std::string trial_json(const SystemConfig& config, const TrialRecord& record);

}  // namespace risnoma
