#include "risnoma/config.hpp"

#include <cmath>
#include <numbers>

#include "risnoma/errors.hpp"

namespace risnoma {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kHalfPi = std::numbers::pi / 2.0;

bool angle_ok(double a) { return a >= -kHalfPi - 1e-12 && a < kHalfPi; }

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double SystemConfig::angle_grid_step() const {
  return std::numbers::pi / static_cast<double>(angle_grid_points - 1);
}

void SystemConfig::validate() const {
  require(n_tx >= 1, "n_tx must be >= 1");
  require(n_ris >= 1, "n_ris must be >= 1");
  require(n_clusters >= 1, "n_clusters must be >= 1");
  require(users_per_cluster == 2, "users_per_cluster is fixed at 2");
  require(p_max > 0.0, "p_max must be > 0");
  require(noise_power > 0.0, "noise_power must be > 0");
  require(r_min_near >= 0.0 && r_min_far >= 0.0, "QoS floors must be >= 0");
  require(spacing_ratio > 0.0, "spacing_ratio must be > 0");
  require(pathloss_ref > 0.0, "pathloss_ref must be > 0");
  require(pathloss_exp.bs_ris >= 0.0 && pathloss_exp.ris_near >= 0.0 &&
              pathloss_exp.ris_far >= 0.0 && pathloss_exp.ris_point >= 0.0,
          "path-loss exponents must be >= 0");
  require(rician_k >= 0.0, "rician_k must be >= 0");
  require(beam_width > 0.0, "beam_width must be > 0");
  require(angle_grid_points >= 2, "angle_grid_points must be >= 2");
  require(!target_angles.empty(), "at least one target angle is required");
  require(target_radii.size() == target_angles.size(),
          "target_radii must match target_angles");
  for (double a : target_angles) require(angle_ok(a), "target angle outside [-pi/2, pi/2)");
  for (double r : target_radii) require(r > 0.0, "target radius must be > 0");
  require(near_radius.lo > 0.0 && near_radius.lo < near_radius.hi, "near_radius band is empty");
  require(far_radius.lo > 0.0 && far_radius.lo < far_radius.hi, "far_radius band is empty");
  require(static_cast<int>(cluster_angle_ranges.size()) == n_clusters,
          "one cluster angle range per cluster is required");
  for (const auto& r : cluster_angle_ranges) {
    require(r.lo < r.hi, "cluster angle range is empty");
    require(angle_ok(r.lo) && angle_ok(r.hi), "cluster angle range outside [-pi/2, pi/2)");
  }
  const auto& c = controls;
  require(c.sca_tol > 0.0 && c.srcr_rank_tol > 0.0 && c.srcr_obj_tol > 0.0 && c.outer_tol > 0.0,
          "tolerances must be > 0");
  require(c.t1_max >= 1 && c.t2_max >= 1 && c.t3_max >= 1, "iteration caps must be >= 1");
  require(c.srcr_step > 0.0 && c.srcr_stall > 0.0, "srcr step sizes must be > 0");
  require(c.power_split_margin > 0.0 && c.power_split_margin < 0.5,
          "power_split_margin must lie in (0, 0.5)");
  require(c.initial_near_split > c.power_split_margin &&
              c.initial_near_split < 1.0 - c.power_split_margin,
          "initial_near_split must lie inside the power-split bounds");
  require(c.conic_tol > 0.0 && c.conic_max_iter >= 1, "conic solver settings invalid");
  for (int m : ris_sweep) require(m >= 1, "ris_sweep entries must be >= 1");
  require(seeds >= 1, "seeds must be >= 1");
}

SystemConfig profile_config(const std::string& name) {
  SystemConfig c;
  c.p_max = dbm_to_watt(35.0);
  c.noise_power = dbm_to_watt(-90.0);
  c.r_min_near = 0.5;
  c.r_min_far = 0.1;
  c.spacing_ratio = 0.5;
  c.pathloss_ref = db_to_linear(-30.0);
  c.rician_k = 3.0;
  c.beam_width = 6.0 * kDeg;
  c.angle_grid_points = 101;
  c.bs_position = {-40.0, 10.0};
  c.near_radius = {20.0, 25.0};
  c.far_radius = {80.0, 85.0};
  if (name == "desk") {
    c.n_tx = 4;
    c.n_ris = 8;
    c.n_clusters = 2;
    c.target_angles = {-45.0 * kDeg, 45.0 * kDeg};
    c.target_radii = {90.0, 80.0};
    c.cluster_angle_ranges = {{-30.0 * kDeg, -20.0 * kDeg}, {20.0 * kDeg, 30.0 * kDeg}};
    c.ris_sweep = {8, 12, 16};
  } else if (name == "paper") {
    c.n_tx = 9;
    c.n_ris = 36;
    c.n_clusters = 3;
    c.target_angles = {-45.0 * kDeg, 0.0, 45.0 * kDeg};
    c.target_radii = {90.0, 90.0, 80.0};
    c.cluster_angle_ranges = {{-30.0 * kDeg, -20.0 * kDeg},
                              {20.0 * kDeg, 30.0 * kDeg},
                              {60.0 * kDeg, 70.0 * kDeg}};
    c.ris_sweep = {10, 20, 30, 36, 40};
    c.seeds = 100;
  } else {
    throw ConfigError("unknown profile '" + name + "' (expected desk or paper)");
  }
  c.validate();
  return c;
}

}  // namespace risnoma
