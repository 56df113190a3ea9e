#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "risnoma/config.hpp"
#include "risnoma/types.hpp"

namespace risnoma {

// Per-trial generator: the master seed and trial index are mixed through a
// seed_seq so every trial gets an independent, reproducible stream.
std::mt19937_64 trial_rng(std::uint64_t master_seed, std::uint64_t trial);

// ULA response, entry p = exp(j 2 pi spacing p sin(theta)).
CVector steering_vector(double theta, int m, double spacing_ratio);

double pathloss(double distance, double exponent, double ref_gain);

// sqrt(gain) (sqrt(k/(k+1)) los + sqrt(1/(k+1)) nlos), nlos ~ CN(0, 1) i.i.d.
// k_factor may be +infinity (pure LoS); the rng is not touched in that case.
CMatrix rician_channel(const CMatrix& los, double k_factor, double gain,
                       std::mt19937_64& rng);

struct UserPlacement {
  Point2 position;
  double radius = 0.0;
  double angle = 0.0;  // seen from the RIS, measured from its broadside
};

struct ScenarioGeometry {
  Point2 bs;
  std::vector<UserPlacement> near;  // one RNU per cluster
  std::vector<UserPlacement> far;   // one RFU per cluster
  std::vector<double> target_angles;
  std::vector<double> target_radii;
};

// G is BS -> RIS (M x N_T); g_near[k], g_far[k] are RIS -> user (M x 1).
struct ChannelSet {
  CMatrix G;
  std::vector<CVector> g_near;
  std::vector<CVector> g_far;

  int n_clusters() const { return static_cast<int>(g_near.size()); }
  int n_ris() const { return static_cast<int>(G.rows()); }
  int n_tx() const { return static_cast<int>(G.cols()); }

  // All 2K user channels, RNUs first then RFUs.
  std::vector<CVector> all_users() const;
};

// The RIS sits at the origin with its broadside along +y; a point at angle
// theta and radius r is (r sin theta, r cos theta).
Point2 polar_point(double radius, double angle);
double ris_angle_of(const Point2& p);

std::pair<ScenarioGeometry, ChannelSet> build_scenario(const SystemConfig& config,
                                                       std::uint64_t seed);

}  // namespace risnoma
