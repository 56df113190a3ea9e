#pragma once

#include <span>
#include <vector>

#include "risnoma/config.hpp"
#include "risnoma/geometry_channel.hpp"
#include "risnoma/types.hpp"

namespace risnoma {

// Optimization variables of the joint design. W[k] and V are the lifted
// covariances; w[k] and v are the extracted vectors (filled once a design
// has been rank-one extracted).
struct BeamState {
  std::vector<CMatrix> W;
  std::vector<double> a_near;
  std::vector<double> a_far;
  CMatrix V;
  std::vector<CVector> w;
  CVector v;

  int n_clusters() const { return static_cast<int>(W.size()); }

  // Lifts extracted vectors: W[k] = w[k] w[k]^H, V = lift_phases(v), a_far = 1 - a_near.
  static BeamState from_vectors(std::vector<CVector> w, std::vector<double> a_near,
                                CVector v);

  // Checks the power split, power budget, unit diagonal and PSD invariants;
  // throws StateError on violation.
  void check_invariants(double p_max, double tol) const;
};

// Lifted RIS matrix of the phase vector v (Theta = diag(v)). The trace forms
// Tr(V Gamma W Gamma^H) below need V = conj(v) conj(v)^H.
CMatrix lift_phases(const CVector& v);

// Gamma = diag(g^H) G, the cascaded BS -> RIS -> user channel.
CMatrix cascaded_channel(const CVector& g, const CMatrix& G);

// Tr(V Gamma W Gamma^H). Equals |g^H diag(v) G w|^2 for V = lift_phases(v), W = w w^H.
double effective_gain(const CMatrix& V, const CMatrix& W, const CVector& g,
                      const CMatrix& G);

// Minimum SINR for a rate floor: 2^R - 1.
double sinr_threshold(double rate);

double rate_f_at_n(const BeamState& state, const ChannelSet& channels, int k,
                   double noise_power);
double rate_n(const BeamState& state, const ChannelSet& channels, int k,
              double noise_power);
double rate_f_at_f(const BeamState& state, const ChannelSet& channels, int k,
                   double noise_power);
double rate_far(const BeamState& state, const ChannelSet& channels, int k,
                double noise_power);

struct ClusterRates {
  double far_at_near = 0.0;  // R_{k,f->n}
  double near = 0.0;         // R_{k,n}
  double far_at_far = 0.0;   // R_{k,f->f}
  double far = 0.0;          // R_{k,f}
};

struct RateReport {
  std::vector<ClusterRates> clusters;
  double sinr_min_near = 0.0;
  double sinr_min_far = 0.0;
};

RateReport rate_report(const BeamState& state, const ChannelSet& channels,
                       const SystemConfig& config);

bool qos_satisfied(const RateReport& report, const SystemConfig& config, double slack);

// Worst margin min_k {R_kn - Rmin_n, R_kf - Rmin_f}; negative means violated.
double qos_margin(const RateReport& report, const SystemConfig& config);

}  // namespace risnoma
