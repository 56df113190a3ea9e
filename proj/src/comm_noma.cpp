#include "risnoma/comm_noma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "risnoma/conic.hpp"
#include "risnoma/errors.hpp"

namespace risnoma {

namespace {

void check_cluster(const BeamState& state, const ChannelSet& channels, int k) {
  if (k < 0 || k >= state.n_clusters() || k >= channels.n_clusters())
    throw ShapeError("cluster index out of range");
  if (state.a_near.size() != state.W.size() || state.a_far.size() != state.W.size())
    throw ShapeError("power split count does not match W");
}

// Effective gains of every cluster's W at one user's channel.
struct UserGains {
  double own = 0.0;    // |g^H Theta G w_k|^2
  double inter = 0.0;  // sum over the other clusters
};

UserGains user_gains(const BeamState& state, const CVector& g, const CMatrix& G, int k) {
  UserGains out;
  for (int j = 0; j < state.n_clusters(); ++j) {
    const double e = effective_gain(state.V, state.W[j], g, G);
    if (j == k) {
      out.own = e;
    } else {
      out.inter += e;
    }
  }
  return out;
}

}  // namespace

CMatrix lift_phases(const CVector& v) {
  const CVector c = v.conjugate();
  return c * c.adjoint();
}

BeamState BeamState::from_vectors(std::vector<CVector> w, std::vector<double> a_near,
                                  CVector v) {
  if (w.size() != a_near.size()) throw ShapeError("one power split per beamformer");
  BeamState s;
  for (const auto& wk : w) s.W.push_back(wk * wk.adjoint());
  for (double a : a_near) {
    s.a_near.push_back(a);
    s.a_far.push_back(1.0 - a);
  }
  s.V = lift_phases(v);
  s.w = std::move(w);
  s.v = std::move(v);
  return s;
}

void BeamState::check_invariants(double p_max, double tol) const {
  if (a_near.size() != W.size() || a_far.size() != W.size())
    throw StateError("power split count does not match W");
  double power = 0.0;
  for (std::size_t k = 0; k < W.size(); ++k) {
    if (std::abs(a_near[k] + a_far[k] - 1.0) > tol)
      throw StateError("power split does not sum to one");
    if (a_near[k] <= 0.0 || a_far[k] <= 0.0) throw StateError("power split outside (0, 1)");
    if (conic::hermitian_eigenvalues(W[k])(0) < -tol * std::max(1.0, W[k].norm()))
      throw StateError("W is not PSD");
    power += W[k].trace().real();
  }
  if (power > p_max * (1.0 + tol)) throw StateError("power budget exceeded");
  if (V.size() > 0) {
    for (Eigen::Index m = 0; m < V.rows(); ++m)
      if (std::abs(V(m, m) - 1.0) > tol) throw StateError("V diagonal is not one");
    if (conic::hermitian_eigenvalues(V)(0) < -tol * V.rows()) throw StateError("V is not PSD");
  }
}

CMatrix cascaded_channel(const CVector& g, const CMatrix& G) {
  if (g.size() != G.rows()) throw ShapeError("user channel length must match G rows");
  return g.conjugate().asDiagonal() * G;
}

double effective_gain(const CMatrix& V, const CMatrix& W, const CVector& g, const CMatrix& G) {
  if (V.rows() != G.rows() || V.cols() != G.rows() || W.rows() != G.cols() ||
      W.cols() != G.cols())
    throw ShapeError("effective_gain: V, W and G dimensions disagree");
  const CMatrix gamma = cascaded_channel(g, G);
  return std::max(0.0, (V * gamma * W * gamma.adjoint()).trace().real());
}

double sinr_threshold(double rate) { return std::exp2(rate) - 1.0; }

double rate_f_at_n(const BeamState& state, const ChannelSet& ch, int k, double noise_power) {
  check_cluster(state, ch, k);
  const auto g = user_gains(state, ch.g_near[k], ch.G, k);
  return std::log2(1.0 + state.a_far[k] * g.own / (state.a_near[k] * g.own + g.inter + noise_power));
}

double rate_n(const BeamState& state, const ChannelSet& ch, int k, double noise_power) {
  check_cluster(state, ch, k);
  const auto g = user_gains(state, ch.g_near[k], ch.G, k);
  return std::log2(1.0 + state.a_near[k] * g.own / (g.inter + noise_power));
}

double rate_f_at_f(const BeamState& state, const ChannelSet& ch, int k, double noise_power) {
  check_cluster(state, ch, k);
  const auto g = user_gains(state, ch.g_far[k], ch.G, k);
  return std::log2(1.0 + state.a_far[k] * g.own / (state.a_near[k] * g.own + g.inter + noise_power));
}

double rate_far(const BeamState& state, const ChannelSet& ch, int k, double noise_power) {
  return std::min(rate_f_at_n(state, ch, k, noise_power), rate_f_at_f(state, ch, k, noise_power));
}

RateReport rate_report(const BeamState& state, const ChannelSet& channels,
                       const SystemConfig& config) {
  RateReport r;
  r.sinr_min_near = sinr_threshold(config.r_min_near);
  r.sinr_min_far = sinr_threshold(config.r_min_far);
  for (int k = 0; k < state.n_clusters(); ++k) {
    ClusterRates c;
    c.far_at_near = rate_f_at_n(state, channels, k, config.noise_power);
    c.near = rate_n(state, channels, k, config.noise_power);
    c.far_at_far = rate_f_at_f(state, channels, k, config.noise_power);
    c.far = std::min(c.far_at_near, c.far_at_far);
    r.clusters.push_back(c);
  }
  return r;
}

double qos_margin(const RateReport& report, const SystemConfig& config) {
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& c : report.clusters) {
    margin = std::min(margin, c.near - config.r_min_near);
    margin = std::min(margin, c.far - config.r_min_far);
  }
  return margin;
}

bool qos_satisfied(const RateReport& report, const SystemConfig& config, double slack) {
  return qos_margin(report, config) >= -slack;
}

}  // namespace risnoma
