#pragma once

// RIS passive beamforming by sequential rank-one constraint relaxation
// (SRCR): the lifted matrix V is optimized under an eigenvector cut
// e^H V e >= eps Tr(V) whose parameter eps is driven from 0 to 1.

#include <random>
#include <span>
#include <string>
#include <vector>

#include "risnoma/conic.hpp"
#include "risnoma/config.hpp"
#include "risnoma/geometry_channel.hpp"
#include "risnoma/sensing.hpp"
#include "risnoma/types.hpp"

namespace risnoma {

// Tr(V A) >= rhs, normalised by the noise power.
struct PassiveRow {
  CMatrix A;
  double rhs = 0.0;
  std::string label;
};

// Everything the V-subproblem needs once W (and the power split) are fixed.
// beampattern[q] = Upsilon_q (sum W) Upsilon_q^H, so gain_q(V) = Tr(V C_q).
struct PassiveModel {
  std::vector<PassiveRow> qos;
  std::vector<CMatrix> beampattern;
  double gain_scale = 1.0;

  int n_ris() const;
};

// Sensing part shared by the NOMA and no-NOMA models.
void add_beampattern_terms(PassiveModel& model, const CMatrix& G, std::span<const CMatrix> W,
                           const AngleGrid& grid, double spacing_ratio);

// The three SIC/QoS rows per cluster, linear in V for fixed W and a.
PassiveModel noma_passive_model(const ChannelSet& channels, std::span<const CMatrix> W,
                                std::span<const double> a_near, const SystemConfig& config,
                                const AngleGrid& grid);

struct SrcrState {
  CMatrix V;
  double epsilon = 0.0;
  double rho = 0.1;
  int iteration = 0;
};

struct SrcrProblem {
  conic::SdpProblem problem;
  conic::ScalarVar chi;
  conic::PsdVar V;
  double gain_scale = 1.0;
};

SrcrProblem build_srcr_problem(const PassiveModel& model, const SrcrState& state);

SrcrProblem build_srcr_problem(const ChannelSet& channels, std::span<const CMatrix> W,
                               std::span<const double> a_near, const SrcrState& state,
                               const SystemConfig& config, const AngleGrid& grid);

// min(1, lambda_max(V) / Tr(V) + rho)
double update_epsilon(const CMatrix& V_next, double rho);

// Tr(V) / lambda_max(V); 1 for an exactly rank-one V.
double rank_one_ratio(const CMatrix& V);

// min_q Tr(V C_q) in physical units.
double passive_objective(const PassiveModel& model, const CMatrix& V);

struct PassiveResult {
  CMatrix V;
  double chi = 0.0;
  // Objective of V^(t) for t = 0, 1, ...; a rejected step repeats the value.
  std::vector<double> trace;
  // Objective of each accepted iterate only.
  std::vector<double> accepted_trace;
  std::vector<double> epsilon_trace;
  int iterations = 0;
  int rejected = 0;
  bool converged = false;
  double rank_ratio = 0.0;
};

// Throws StallError (carrying the current iterate) when rho falls below
// the stall threshold without an accepted step.
PassiveResult algorithm2(const PassiveModel& model, const SystemConfig& config,
                         const CMatrix& V_init);

PassiveResult algorithm2(const ChannelSet& channels, std::span<const CMatrix> W,
                         std::span<const double> a_near, const SystemConfig& config,
                         const AngleGrid& grid, const CMatrix& V_init);

struct PhaseExtraction {
  CVector v;
  double fidelity = 0.0;  // ||V - lift_phases(v)||_F / M^2
};

// v_m = conj(e_m) / |e_m| for the principal eigenvector e, so that
// lift_phases(v) approximates V; entries with
// |e_m| < 1e-12 fall back to 1 (so an identity V yields all ones).
PhaseExtraction extract_phases(const CMatrix& V);

CVector random_phases(int m, std::mt19937_64& rng);

}  // namespace risnoma
