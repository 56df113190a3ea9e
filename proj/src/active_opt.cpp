#include "risnoma/active_opt.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

#include "risnoma/comm_noma.hpp"
#include "risnoma/errors.hpp"

namespace risnoma {

namespace {

using conic::Affine;
using conic::Sense;

// Largest beampattern gain any W with Tr(W) <= P_max can reach at one angle.
double gain_reference(const CMatrix& V, const CMatrix& G, const AngleGrid& grid,
                      double spacing, double p_max) {
  double best = 0.0;
  for (double theta : grid.interested) {
    const CMatrix ups = sensing_cascade(theta, G, spacing);
    const CMatrix B = ups.adjoint() * V * ups;
    best = std::max(best, conic::hermitian_eigenvalues(B).maxCoeff());
  }
  return best > 0.0 ? p_max * best : 1.0;
}

bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace

CMatrix user_quadratic(const CVector& g, const CMatrix& G, const CMatrix& V) {
  const CMatrix gamma = cascaded_channel(g, G);
  return gamma.adjoint() * V * gamma;
}

ActiveProblem build_relaxed_problem(const ChannelSet& channels, const CMatrix& V,
                                    const ScaState& state, const SystemConfig& config,
                                    const AngleGrid& grid, bool elastic) {
  const int K = channels.n_clusters();
  const int n_tx = channels.n_tx();
  if (V.rows() != channels.n_ris() || V.cols() != channels.n_ris())
    throw ShapeError("V does not match the RIS size");
  if (grid.interested.empty()) throw DomainError("no interested angles on the grid");
  const double r_near = sinr_threshold(config.r_min_near);
  const double r_far = sinr_threshold(config.r_min_far);
  const bool near_qos = r_near > 0.0;
  const bool far_qos = r_far > 0.0;
  if ((near_qos && static_cast<int>(state.eta_fixed.size()) != K) ||
      (far_qos && (static_cast<int>(state.beta_near.size()) != K ||
                   static_cast<int>(state.beta_far.size()) != K)))
    throw StateError("SCA state does not match the cluster count");
  for (int k = 0; k < K; ++k) {
    if (near_qos && !(state.eta_fixed[k] > 0.0)) throw StateError("eta fixed point must be > 0");
    if (far_qos && !(state.beta_near[k] > 0.0 && state.beta_far[k] > 0.0))
      throw StateError("beta fixed points must be > 0");
  }

  ActiveProblem out;
  out.scale.power = config.p_max;
  out.scale.noise = config.noise_power;
  out.scale.gain = gain_reference(V, channels.G, grid, config.spacing_ratio, config.p_max);
  auto& prob = out.problem;
  const double margin = config.controls.power_split_margin;

  out.chi = prob.add_scalar("chi", 0.0);
  for (int k = 0; k < K; ++k) {
    out.a_near.push_back(prob.add_scalar("a_near_" + std::to_string(k), margin, 1.0 - margin));
    out.W.push_back(prob.add_psd("W_" + std::to_string(k), n_tx));
  }
  Affine slack;
  if (elastic) {
    out.slack = prob.add_scalar("slack", 0.0);
    slack = Affine::term(out.slack);
    prob.maximize(-slack);
  } else {
    prob.maximize(Affine::term(out.chi));
  }

  // Beampattern floors.
  for (std::size_t q = 0; q < grid.interested.size(); ++q) {
    const CMatrix ups = sensing_cascade(grid.interested[q], channels.G, config.spacing_ratio);
    const CMatrix B = ups.adjoint() * V * ups * (out.scale.power / out.scale.gain);
    Affine gain;
    for (int k = 0; k < K; ++k) gain += Affine::trace(out.W[k], B);
    prob.add_constraint(gain, Sense::kGreaterEqual, Affine::term(out.chi),
                        "beampattern_" + std::to_string(q));
  }

  // Power budget, in units of P_max.
  Affine power;
  for (int k = 0; k < K; ++k)
    power += Affine::trace(out.W[k], CMatrix::Identity(n_tx, n_tx));
  prob.add_constraint(power, Sense::kLessEqual, 1.0, "power");

  const double snr_scale = out.scale.power / out.scale.noise;
  std::vector<CMatrix> h_near(K);
  std::vector<CMatrix> h_far(K);
  for (int k = 0; k < K; ++k) {
    h_near[k] = user_quadratic(channels.g_near[k], channels.G, V) * snr_scale;
    h_far[k] = user_quadratic(channels.g_far[k], channels.G, V) * snr_scale;
  }

  out.eta.assign(K, conic::ScalarVar{});
  for (int k = 0; k < K; ++k) {
    const std::string tag = std::to_string(k);
    const Affine s_near = Affine::trace(out.W[k], h_near[k]);
    const Affine s_far = Affine::trace(out.W[k], h_far[k]);
    Affine i_near;
    Affine i_far;
    for (int j = 0; j < K; ++j) {
      if (j == k) continue;
      i_near += Affine::trace(out.W[j], h_near[k]);
      i_far += Affine::trace(out.W[j], h_far[k]);
    }
    const Affine a = Affine::term(out.a_near[k]);

    if (near_qos) {
      out.eta[k] = prob.add_scalar("eta_" + tag, 0.0);
      const Affine eta = Affine::term(out.eta[k]);
      // a Tr(W H) >= eta^2 as a 2x2 LMI.
      prob.add_lmi(2, {a, eta, eta, s_near}, "schur_" + tag);
      // First-order lower bound of eta^2 around eta_fixed.
      const double e0 = state.eta_fixed[k];
      prob.add_constraint(e0 * e0 + 2.0 * e0 * (eta - e0) + slack, Sense::kGreaterEqual,
                          r_near * (i_near + 1.0), "taylor_" + tag);
    }
    if (far_qos) {
      // (Tr(W H) - r_f (I + sigma^2)) / (r_f + 1) >= beta a^2 / 2 + Tr(W H)^2 / (2 beta)
      const double b1 = state.beta_near[k];
      const double b2 = state.beta_far[k];
      prob.add_quadratic((s_near - r_far * (i_near + 1.0)) * (1.0 / (r_far + 1.0)) + slack,
                         {{b1 / 2.0, a}, {1.0 / (2.0 * b1), s_near}}, "agm_near_" + tag);
      prob.add_quadratic((s_far - r_far * (i_far + 1.0)) * (1.0 / (r_far + 1.0)) + slack,
                         {{b2 / 2.0, a}, {1.0 / (2.0 * b2), s_far}}, "agm_far_" + tag);
    }
  }
  return out;
}

ActiveIterate read_active_solution(const ActiveProblem& problem,
                                   const conic::SdpSolution& solution) {
  ActiveIterate it;
  it.chi = solution.value(problem.chi) * problem.scale.gain;
  for (std::size_t k = 0; k < problem.W.size(); ++k) {
    CMatrix W = solution.value(problem.W[k]) * problem.scale.power;
    it.W.push_back(0.5 * (W + W.adjoint()));
    it.a_near.push_back(solution.value(problem.a_near[k]));
    it.eta.push_back(problem.eta[k].id >= 0 ? solution.value(problem.eta[k]) : 0.0);
  }
  return it;
}

ScaState update_fixed_points(const ActiveIterate& iterate, const ChannelSet& channels,
                             const CMatrix& V, const SystemConfig& config,
                             const ScaState& previous) {
  ScaState next = matched_sca_state(channels, V, config, iterate.W, iterate.a_near);
  if (sinr_threshold(config.r_min_near) > 0.0) next.eta_fixed = iterate.eta;
  next.iteration = previous.iteration + 1;
  next.objective_trace = previous.objective_trace;
  next.objective_trace.push_back(iterate.chi);
  return next;
}

ScaState matched_sca_state(const ChannelSet& channels, const CMatrix& V,
                           const SystemConfig& config, std::span<const CMatrix> W,
                           std::span<const double> a_near) {
  const int K = channels.n_clusters();
  if (static_cast<int>(W.size()) != K || static_cast<int>(a_near.size()) != K)
    throw ShapeError("one W and one power split per cluster");
  ScaState s;
  for (int k = 0; k < K; ++k) {
    if (!(a_near[k] > 1e-12)) throw StateError("power split a_near -> 0; beta undefined");
    const double tn =
        (W[k] * user_quadratic(channels.g_near[k], channels.G, V)).trace().real() /
        config.noise_power;
    const double tf =
        (W[k] * user_quadratic(channels.g_far[k], channels.G, V)).trace().real() /
        config.noise_power;
    s.eta_fixed.push_back(std::sqrt(std::max(0.0, a_near[k] * tn)));
    s.beta_near.push_back(tn / a_near[k]);
    s.beta_far.push_back(tf / a_near[k]);
  }
  return s;
}

ScaState initial_sca_state(const ChannelSet& channels, const CMatrix& V,
                           const SystemConfig& config) {
  const int K = channels.n_clusters();
  const int n = channels.n_tx();
  const CMatrix w_bar = CMatrix::Identity(n, n) * (config.p_max / (K * n));
  std::vector<CMatrix> W(K, w_bar);
  std::vector<double> a(K, config.controls.initial_near_split);
  return matched_sca_state(channels, V, config, W, a);
}

ScaState feasible_sca_state(const ChannelSet& channels, const CMatrix& V,
                            const SystemConfig& config, const AngleGrid& grid,
                            const ScaState& start) {
  constexpr double kRateMargin = 1e-2;  // bits/s/Hz
  constexpr double kSlackTol = 1e-7;
  SystemConfig raised = config;
  if (raised.r_min_near > 0.0) raised.r_min_near += kRateMargin;
  if (raised.r_min_far > 0.0) raised.r_min_far += kRateMargin;
  const auto& ctl = config.controls;
  const conic::SolverSettings settings{ctl.conic_tol, ctl.conic_max_iter, false};

  ScaState state = start;
  double previous = std::numeric_limits<double>::infinity();
  for (int t = 1; t <= ctl.t1_max; ++t) {
    const ActiveProblem prob = build_relaxed_problem(channels, V, state, raised, grid, true);
    const conic::SdpSolution sol = conic::solve(prob.problem, settings);
    if (!sol.optimal())
      throw SolverError(std::string("elastic active problem failed: ") +
                        conic::to_string(sol.status));
    const ActiveIterate it = read_active_solution(prob, sol);
    const double slack = sol.value(prob.slack);
    state = matched_sca_state(channels, V, config, it.W, it.a_near);
    if (slack <= kSlackTol) return state;
    if (slack > previous * (1.0 - 1e-3)) break;
    previous = slack;
  }
  throw InfeasibleError("QoS floors unattainable for this RIS configuration");
}

namespace {

// Even with the whole budget on one user and no interference, the SNR is at
// most P lambda_max(H) / sigma^2. Floors above that are hopeless.
void check_single_user_bound(const ChannelSet& channels, const CMatrix& V,
                             const SystemConfig& config) {
  const double r_near = sinr_threshold(config.r_min_near);
  const double r_far = sinr_threshold(config.r_min_far);
  for (int k = 0; k < channels.n_clusters(); ++k) {
    const double snr = config.p_max / config.noise_power;
    const double near = snr * conic::hermitian_eigenvalues(
                                  user_quadratic(channels.g_near[k], channels.G, V)).maxCoeff();
    const double far = snr * conic::hermitian_eigenvalues(
                                 user_quadratic(channels.g_far[k], channels.G, V)).maxCoeff();
    if (r_near > near || r_far > std::min(near, far))
      throw InfeasibleError("QoS floor of cluster " + std::to_string(k) +
                            " exceeds its interference-free SNR");
  }
}

}  // namespace

ActiveResult algorithm1(const ChannelSet& channels, const CMatrix& V,
                        const SystemConfig& config, const AngleGrid& grid,
                        const std::optional<ScaState>& init) {
  const auto& ctl = config.controls;
  conic::SolverSettings settings{ctl.conic_tol, ctl.conic_max_iter, false};
  check_single_user_bound(channels, V, config);
  ScaState state = init ? *init : initial_sca_state(channels, V, config);
  state.objective_trace.clear();
  state.iteration = 0;

  ActiveResult res;
  std::optional<ActiveIterate> best;
  for (int t = 1; t <= ctl.t1_max; ++t) {
    const ActiveProblem prob = build_relaxed_problem(channels, V, state, config, grid);
    const conic::SdpSolution sol = conic::solve(prob.problem, settings);
    if (!sol.optimal()) {
      if (t == 1 && !res.phase_one) {
        state = feasible_sca_state(channels, V, config, grid, state);
        res.phase_one = true;
        t = 0;
        continue;
      }
      if (t == 1) {
        if (sol.status == conic::SdpStatus::kInfeasible)
          throw InfeasibleError("relaxed active problem is infeasible (QoS unattainable)");
        throw SolverError(std::string("relaxed active problem failed: ") +
                          conic::to_string(sol.status));
      }
      std::cerr << "warning: active SCA step " << t << " returned "
                << conic::to_string(sol.status) << "; keeping iterate " << t - 1 << "\n";
      res.stopped_early = true;
      break;
    }
    ActiveIterate it = read_active_solution(prob, sol);
    res.trace.push_back(it.chi);
    res.iterations = t;
    const bool settled = t > 1 && rel_close(it.chi, best->chi, ctl.sca_tol);
    best = std::move(it);
    state = update_fixed_points(*best, channels, V, config, state);
    if (settled) {
      res.converged = true;
      break;
    }
  }
  res.W = best->W;
  res.a_near = best->a_near;
  res.chi = best->chi;
  res.state = state;
  for (const auto& W : res.W) res.rank_ratio.push_back(second_eigen_ratio(W));
  return res;
}

Extraction extract_beamformers(std::span<const CMatrix> W) {
  Extraction out;
  for (const auto& Wk : W) {
    const double norm = Wk.norm();
    if (norm == 0.0) {
      out.w.push_back(CVector::Zero(Wk.rows()));
      out.rel_error.push_back(0.0);
      continue;
    }
    const auto top = conic::principal_eigpair(Wk);
    const CVector w = std::sqrt(std::max(0.0, top.value)) * top.vector;
    out.rel_error.push_back((Wk - w * w.adjoint()).norm() / norm);
    out.w.push_back(w);
  }
  return out;
}

double second_eigen_ratio(const CMatrix& W) {
  if (W.rows() < 2) return 0.0;
  const RVector ev = conic::hermitian_eigenvalues(W);
  const double top = ev(ev.size() - 1);
  if (top <= 0.0) return 0.0;
  return std::max(0.0, ev(ev.size() - 2)) / top;
}

}  // namespace risnoma
