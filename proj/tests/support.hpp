#pragma once

// Random instances and independent reference formulas for the tests.

#include <random>
#include <vector>

#include "risnoma/config.hpp"
#include "risnoma/geometry_channel.hpp"
#include "risnoma/types.hpp"

namespace risnoma::testing {

CVector random_cvector(int n, std::mt19937_64& rng, double scale = 1.0);
CMatrix random_cmatrix(int rows, int cols, std::mt19937_64& rng, double scale = 1.0);
CVector random_unit_phases(int m, std::mt19937_64& rng);
// Random Hermitian PSD matrix of the given rank.
CMatrix random_psd(int n, int rank, std::mt19937_64& rng);

// i.i.d. CN(0, scale) channels.
ChannelSet random_channels(int K, int n_tx, int m, std::mt19937_64& rng, double scale = 1.0);

// |g^H diag(v) G w|^2, written with explicit loops.
double vector_gain(const CVector& g, const CMatrix& G, const CVector& v, const CVector& w);

// sum_k |a(theta)^H diag(v) G w_k|^2 with a(theta) built element by element.
double vector_beampattern(const CVector& v, const std::vector<CVector>& w, const CMatrix& G,
                          double theta, double spacing_ratio);

// max over 16-PSK phase vectors (first entry fixed to 1) of
// min_theta sum_k |a^H diag(v) G w_k|^2.
double psk16_oracle(const std::vector<CVector>& w, const CMatrix& G,
                    const std::vector<double>& angles, double spacing_ratio);

double rel_diff(double a, double b);

// Desk profile with a single target and cluster, no QoS floors.
SystemConfig single_cluster_config(int n_tx, int m);

}  // namespace risnoma::testing

namespace risnoma::testing {

// Largest deviations found when evaluating the Taylor and AGM rows that the
// active builder emits, at random SCA states on random channels.
struct SurrogateReport {
  double taylor_tight = 0.0;    // |surrogate - eta^2| / eta^2 at eta = eta_fixed
  double taylor_over = 0.0;     // max (surrogate - eta^2) / eta^2 elsewhere, should be <= 0
  double agm_tight = 0.0;       // |bound - a T| / (a T) at matched beta
  double agm_under = 0.0;       // max (a T - bound) / (a T) elsewhere, should be <= 0
  int taylor_rows = 0;
  int agm_rows = 0;
};

SurrogateReport check_surrogates(int n_states, std::uint64_t seed);

}  // namespace risnoma::testing
