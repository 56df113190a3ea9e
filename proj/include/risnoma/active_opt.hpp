#pragma once

// Joint active beamforming and NOMA power-split design for a fixed RIS
// matrix V: successive convex approximation over the semidefinite
// relaxation of the max-min beampattern problem.

#include <optional>
#include <span>
#include <vector>

#include "risnoma/conic.hpp"
#include "risnoma/config.hpp"
#include "risnoma/geometry_channel.hpp"
#include "risnoma/sensing.hpp"
#include "risnoma/types.hpp"

namespace risnoma {

// Fixed points of the convex surrogates, one entry per cluster. Stored in
// noise-normalised units: eta_fixed is eta / sigma and the betas are
// Tr(W H) / (a sigma^2), so the values are independent of the SDP scaling.
struct ScaState {
  std::vector<double> eta_fixed;
  std::vector<double> beta_near;  // beta_{k,1}
  std::vector<double> beta_far;   // beta_{k,2}
  int iteration = 0;
  std::vector<double> objective_trace;
};

// Inside the SDP, W = power * Wt, chi = gain * chi_t, and the QoS rows are
// divided by the noise power, so every variable is O(1).
struct ActiveScaling {
  double power = 1.0;
  double noise = 1.0;
  double gain = 1.0;
};

struct ActiveProblem {
  conic::SdpProblem problem;
  conic::ScalarVar chi;
  std::vector<conic::ScalarVar> a_near;
  std::vector<conic::ScalarVar> eta;  // id == -1 when the near floor is zero
  std::vector<conic::PsdVar> W;
  conic::ScalarVar slack;  // id == -1 unless elastic
  ActiveScaling scale;
};

// One solution of the relaxed problem in physical units.
struct ActiveIterate {
  std::vector<CMatrix> W;
  std::vector<double> a_near;
  std::vector<double> eta;  // noise-normalised
  double chi = 0.0;
};

// H_{k,i} = Gamma_{k,i}^H V Gamma_{k,i}.
CMatrix user_quadratic(const CVector& g, const CMatrix& G, const CMatrix& V);

// With elastic set, every QoS surrogate gets a shared slack s >= 0 and the
// objective becomes min s; the problem is then always feasible.
ActiveProblem build_relaxed_problem(const ChannelSet& channels, const CMatrix& V,
                                    const ScaState& state, const SystemConfig& config,
                                    const AngleGrid& grid, bool elastic = false);

// Elastic SCA from `start` on slightly raised QoS floors until the slack
// vanishes. Returns fixed points matched to a strictly QoS-feasible design;
// throws InfeasibleError if the slack stalls above zero.
ScaState feasible_sca_state(const ChannelSet& channels, const CMatrix& V,
                            const SystemConfig& config, const AngleGrid& grid,
                            const ScaState& start);

ActiveIterate read_active_solution(const ActiveProblem& problem,
                                   const conic::SdpSolution& solution);

// eta_fixed <- eta; beta_{k,1} = Tr(W_k H_{k,n}) / a_{k,n};
// beta_{k,2} = Tr(W_k H_{k,f}) / a_{k,n}.
ScaState update_fixed_points(const ActiveIterate& iterate, const ChannelSet& channels,
                             const CMatrix& V, const SystemConfig& config,
                             const ScaState& previous);

// Start point: a_{k,n} = initial_near_split, W = (P_max / (K N_T)) I.
ScaState initial_sca_state(const ChannelSet& channels, const CMatrix& V,
                           const SystemConfig& config);

// Fixed points matched to an existing design, so that design stays feasible
// (and the surrogates tight) in the next relaxed problem.
ScaState matched_sca_state(const ChannelSet& channels, const CMatrix& V,
                           const SystemConfig& config, std::span<const CMatrix> W,
                           std::span<const double> a_near);

struct ActiveResult {
  std::vector<CMatrix> W;
  std::vector<double> a_near;
  double chi = 0.0;
  std::vector<double> trace;
  ScaState state;
  int iterations = 0;
  bool converged = false;
  // A later relaxed problem failed; the best earlier iterate was returned.
  bool stopped_early = false;
  // lambda_2 / lambda_1 of each returned W_k.
  std::vector<double> rank_ratio;
  // The start point had to be repaired by the elastic phase.
  bool phase_one = false;
};

// If the first relaxed problem cannot be solved, the fixed points are
// repaired with feasible_sca_state and the loop restarts. Throws
// InfeasibleError when the QoS floors are unattainable and SolverError on
// numerical failure.
ActiveResult algorithm1(const ChannelSet& channels, const CMatrix& V,
                        const SystemConfig& config, const AngleGrid& grid,
                        const std::optional<ScaState>& init = std::nullopt);

struct Extraction {
  std::vector<CVector> w;
  std::vector<double> rel_error;  // ||W - w w^H||_F / ||W||_F
};

// w_k = sqrt(lambda_max) e_max(W_k); zero matrices map to zero vectors.
Extraction extract_beamformers(std::span<const CMatrix> W);

// lambda_2 / lambda_1 of a Hermitian PSD matrix (0 for rank <= 1 or zero).
double second_eigen_ratio(const CMatrix& W);

}  // namespace risnoma
