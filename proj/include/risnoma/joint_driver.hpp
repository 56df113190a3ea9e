#pragma once

// Outer alternation between the active (W, a) and passive (V) designs, and
// the conventional RIS-ISAC baseline that serves every user with its own
// beam and no power-domain multiplexing.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "risnoma/active_opt.hpp"
#include "risnoma/comm_noma.hpp"
#include "risnoma/config.hpp"
#include "risnoma/geometry_channel.hpp"
#include "risnoma/passive_opt.hpp"
#include "risnoma/sensing.hpp"
#include "risnoma/types.hpp"

namespace risnoma {

// Stream for the random V_init of trial `seed`, independent of the channel
// stream of the same trial.
std::mt19937_64 phase_rng(const SystemConfig& config, std::uint64_t seed);

// A rank-one NOMA design evaluated exactly.
struct NomaDesign {
  std::vector<CVector> w;
  std::vector<double> a_near;
  CVector v;
  double chi = 0.0;  // min gain over the interested angles
};

// Best per-stream powers for fixed unit beam directions and fixed phases:
// with p_near = a p and p_far = (1 - a) p every SINR floor is linear, so the
// problem is an LP. Returns nullopt if the floors cannot be met.
std::optional<NomaDesign> noma_power_allocation(const ChannelSet& channels, const CVector& v,
                                                std::span<const CVector> directions,
                                                const SystemConfig& config,
                                                const AngleGrid& grid);

struct OuterDiagnostics {
  std::vector<std::vector<double>> active_traces;
  std::vector<std::vector<double>> passive_traces;           // includes rejected steps
  std::vector<std::vector<double>> passive_accepted_traces;  // accepted iterates only
  std::vector<std::vector<double>> active_rank_ratios;       // lambda_2/lambda_1 per W_k
  std::vector<double> passive_rank_ratios;                   // Tr(V)/lambda_max(V)
  std::vector<double> passive_diag_errors;                   // max |V_mm - 1|
  std::vector<double> phase_fidelity;
  std::vector<bool> passive_converged;
  std::vector<bool> active_phase_one;
  std::vector<std::string> events;
};

struct JointResult {
  BeamState state;  // lifted from the extracted vectors
  double chi = 0.0;
  std::vector<double> outer_trace;
  int outer_iterations = 0;
  bool converged = false;
  OuterDiagnostics diagnostics;
};

// Algorithm 3. The outer trace holds the exact min gain of the incumbent
// rank-one design after each outer iteration; a candidate replaces the
// incumbent only if it meets every QoS floor and does not lower the gain.
JointResult algorithm3(const ChannelSet& channels, const SystemConfig& config,
                       std::uint64_t seed);

// Conventional RIS-ISAC: one beam per user, SINR floors
// Tr(V C_jj) >= r_j (sum_{i != j} Tr(V C_ji) + sigma^2).
struct BaselineDesign {
  std::vector<CMatrix> W;
  std::vector<CVector> w;
  CMatrix V;
  CVector v;
};

struct BaselineResult {
  BaselineDesign design;
  double chi = 0.0;
  std::vector<double> outer_trace;
  int outer_iterations = 0;
  bool converged = false;
  OuterDiagnostics diagnostics;
};

// Per-user SINR of a baseline design, users in the order given.
std::vector<double> baseline_sinr(const BaselineDesign& design, const CMatrix& G,
                                  std::span<const CVector> users, double noise_power);

BaselineResult baseline_ris_isac(const CMatrix& G, std::span<const CVector> users,
                                 std::span<const double> rate_floors,
                                 const SystemConfig& config, std::uint64_t seed);

// Same channels as the NOMA run: RNUs take r_min_near, RFUs r_min_far.
BaselineResult baseline_ris_isac(const ChannelSet& channels, const SystemConfig& config,
                                 std::uint64_t seed);

}  // namespace risnoma
