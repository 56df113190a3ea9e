#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "risnoma/types.hpp"

namespace risnoma {

// Half-open interval (lo, hi], used for radius bands and cluster angle ranges.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct PathlossExponents {
  double bs_ris = 2.2;
  double ris_near = 2.2;
  double ris_far = 2.2;
  // Used for the illumination heatmap (RIS -> arbitrary point).
  double ris_point = 2.2;
};

// Iteration caps and tolerances for the three nested optimizers.
struct SolverControls {
  double sca_tol = 1e-4;        // relative change of chi, active loop
  double srcr_rank_tol = 1e-4;  // Tr(V)/lambda_max(V) <= 1 + tol
  double srcr_obj_tol = 1e-3;   // relative change of chi, passive loop
  double outer_tol = 1e-3;      // relative change of chi, outer loop
  int t1_max = 30;
  int t2_max = 50;
  int t3_max = 20;
  double srcr_step = 0.1;         // rho^(0)
  double srcr_stall = 1e-8;       // rho floor before giving up
  double power_split_margin = 1e-4;  // a in [margin, 1 - margin]
  double initial_near_split = 0.2;
  double conic_tol = 1e-8;
  int conic_max_iter = 200;
};

// All scenario scalars in linear units. dBm/dB inputs are converted once by
// the config loader.
struct SystemConfig {
  int n_tx = 4;
  int n_ris = 8;
  int n_clusters = 2;
  int users_per_cluster = 2;

  double p_max = 3.1622776601683795;  // W
  double noise_power = 1e-12;         // W
  double r_min_near = 0.5;            // bits/s/Hz
  double r_min_far = 0.1;             // bits/s/Hz

  double spacing_ratio = 0.5;  // d / lambda
  double pathloss_ref = 1e-3;  // linear gain at 1 m
  PathlossExponents pathloss_exp;
  double rician_k = 3.0;  // linear

  std::vector<double> target_angles;  // rad
  std::vector<double> target_radii;   // m
  double beam_width = 0.10471975511965977;  // rad (6 deg)
  int angle_grid_points = 101;              // grid over [-pi/2, pi/2]

  Point2 bs_position{-40.0, 10.0};
  Interval near_radius{20.0, 25.0};
  Interval far_radius{80.0, 85.0};
  std::vector<Interval> cluster_angle_ranges;  // rad, one per cluster

  SolverControls controls;
  std::vector<int> ris_sweep;  // M values for sweep experiments
  std::uint64_t rng_seed = 1;
  int seeds = 20;  // default trial count for the Monte-Carlo drivers

  double angle_grid_step() const;

  // Throws ConfigError on the first violated invariant.
  void validate() const;
};

double dbm_to_watt(double dbm);
double db_to_linear(double db);

// Built-in profiles: "desk" (small, minutes-scale) and "paper" (full scale).
SystemConfig profile_config(const std::string& name);

}  // namespace risnoma
