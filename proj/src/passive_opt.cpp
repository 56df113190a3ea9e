#include "risnoma/passive_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "risnoma/comm_noma.hpp"
#include "risnoma/errors.hpp"

namespace risnoma {

namespace {

using conic::Affine;
using conic::Sense;

bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

CMatrix cascade_cov(const CVector& g, const CMatrix& G, const CMatrix& W) {
  const CMatrix gamma = cascaded_channel(g, G);
  return gamma * W * gamma.adjoint();
}

}  // namespace

int PassiveModel::n_ris() const {
  if (!beampattern.empty()) return static_cast<int>(beampattern.front().rows());
  if (!qos.empty()) return static_cast<int>(qos.front().A.rows());
  return 0;
}

void add_beampattern_terms(PassiveModel& model, const CMatrix& G, std::span<const CMatrix> W,
                           const AngleGrid& grid, double spacing_ratio) {
  if (grid.interested.empty()) throw DomainError("no interested angles on the grid");
  CMatrix sum = CMatrix::Zero(G.cols(), G.cols());
  for (const auto& Wk : W) sum += Wk;
  double scale = 0.0;
  for (double theta : grid.interested) {
    const CMatrix ups = sensing_cascade(theta, G, spacing_ratio);
    CMatrix C = ups * sum * ups.adjoint();
    C = 0.5 * (C + C.adjoint());
    scale = std::max(scale, G.rows() * conic::hermitian_eigenvalues(C).maxCoeff());
    model.beampattern.push_back(std::move(C));
  }
  model.gain_scale = scale > 0.0 ? scale : 1.0;
}

PassiveModel noma_passive_model(const ChannelSet& channels, std::span<const CMatrix> W,
                                std::span<const double> a_near, const SystemConfig& config,
                                const AngleGrid& grid) {
  const int K = channels.n_clusters();
  if (static_cast<int>(W.size()) != K || static_cast<int>(a_near.size()) != K)
    throw ShapeError("one W and one power split per cluster");
  const double r_near = sinr_threshold(config.r_min_near);
  const double r_far = sinr_threshold(config.r_min_far);
  const double inv_noise = 1.0 / config.noise_power;

  PassiveModel model;
  for (int k = 0; k < K; ++k) {
    const std::string tag = std::to_string(k);
    const double an = a_near[k];
    const double af = 1.0 - an;
    const CMatrix own_n = cascade_cov(channels.g_near[k], channels.G, W[k]);
    const CMatrix own_f = cascade_cov(channels.g_far[k], channels.G, W[k]);
    CMatrix inter_n = CMatrix::Zero(own_n.rows(), own_n.cols());
    CMatrix inter_f = inter_n;
    for (int j = 0; j < K; ++j) {
      if (j == k) continue;
      inter_n += cascade_cov(channels.g_near[k], channels.G, W[j]);
      inter_f += cascade_cov(channels.g_far[k], channels.G, W[j]);
    }
    // RNU decodes its own signal after SIC.
    model.qos.push_back({(an * own_n - r_near * inter_n) * inv_noise, r_near, "near_" + tag});
    // RNU decodes the RFU signal first.
    model.qos.push_back(
        {(af * own_n - r_far * (an * own_n + inter_n)) * inv_noise, r_far, "far_at_near_" + tag});
    // RFU decodes its own signal.
    model.qos.push_back(
        {(af * own_f - r_far * (an * own_f + inter_f)) * inv_noise, r_far, "far_at_far_" + tag});
  }
  add_beampattern_terms(model, channels.G, W, grid, config.spacing_ratio);
  return model;
}

SrcrProblem build_srcr_problem(const PassiveModel& model, const SrcrState& state) {
  const int M = model.n_ris();
  if (state.V.rows() != M || state.V.cols() != M) throw ShapeError("SRCR iterate has wrong size");
  if (!(state.epsilon >= 0.0 && state.epsilon <= 1.0))
    throw StateError("SRCR relaxation parameter outside [0, 1]");
  if (!(state.rho > 0.0)) throw StateError("SRCR step size must be > 0");

  SrcrProblem out;
  out.gain_scale = model.gain_scale;
  auto& prob = out.problem;
  out.chi = prob.add_scalar("chi", 0.0);
  out.V = prob.add_psd("V", M);
  prob.maximize(Affine::term(out.chi));

  for (const auto& row : model.qos)
    prob.add_constraint(Affine::trace(out.V, row.A), Sense::kGreaterEqual, row.rhs, row.label);
  for (std::size_t q = 0; q < model.beampattern.size(); ++q)
    prob.add_constraint(Affine::trace(out.V, model.beampattern[q] / model.gain_scale),
                        Sense::kGreaterEqual, Affine::term(out.chi),
                        "beampattern_" + std::to_string(q));
  for (int m = 0; m < M; ++m) {
    CMatrix E = CMatrix::Zero(M, M);
    E(m, m) = 1.0;
    prob.add_constraint(Affine::trace(out.V, E), Sense::kEqual, 1.0, "diag_" + std::to_string(m));
  }
  const CVector e = conic::principal_eigpair(state.V).vector;
  const CMatrix cut = e * e.adjoint() - state.epsilon * CMatrix::Identity(M, M);
  prob.add_constraint(Affine::trace(out.V, cut), Sense::kGreaterEqual, 0.0, "eigen_cut");
  return out;
}

SrcrProblem build_srcr_problem(const ChannelSet& channels, std::span<const CMatrix> W,
                               std::span<const double> a_near, const SrcrState& state,
                               const SystemConfig& config, const AngleGrid& grid) {
  return build_srcr_problem(noma_passive_model(channels, W, a_near, config, grid), state);
}

double rank_one_ratio(const CMatrix& V) {
  const double top = conic::hermitian_eigenvalues(V).maxCoeff();
  if (!(top > 0.0)) return std::numeric_limits<double>::infinity();
  return V.trace().real() / top;
}

double update_epsilon(const CMatrix& V_next, double rho) {
  return std::min(1.0, 1.0 / rank_one_ratio(V_next) + rho);
}

double passive_objective(const PassiveModel& model, const CMatrix& V) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& C : model.beampattern) best = std::min(best, (V * C).trace().real());
  return best;
}

PassiveResult algorithm2(const PassiveModel& model, const SystemConfig& config,
                         const CMatrix& V_init) {
  const auto& ctl = config.controls;
  const conic::SolverSettings settings{ctl.conic_tol, ctl.conic_max_iter, false};
  const int M = model.n_ris();
  if (V_init.rows() != M || V_init.cols() != M) throw ShapeError("V_init has wrong size");

  PassiveResult res;
  SrcrState state{V_init, 0.0, ctl.srcr_step, 0};
  double chi_prev = passive_objective(model, state.V);
  res.trace.push_back(chi_prev);
  res.epsilon_trace.push_back(state.epsilon);

  for (int t = 0; t < ctl.t2_max; ++t) {
    const SrcrProblem prob = build_srcr_problem(model, state);
    const conic::SdpSolution sol = conic::solve(prob.problem, settings);
    double chi_now = chi_prev;
    if (sol.optimal()) {
      const CMatrix& Vs = sol.value(prob.V);
      state.V = 0.5 * (Vs + Vs.adjoint());
      state.rho = ctl.srcr_step;
      chi_now = passive_objective(model, state.V);
      res.accepted_trace.push_back(chi_now);
    } else {
      ++res.rejected;
      state.rho /= 2.0;
      if (state.rho < ctl.srcr_stall)
        throw StallError("SRCR step size underflow without progress", state.V, chi_prev);
    }
    state.epsilon = update_epsilon(state.V, state.rho);
    state.iteration = t + 1;
    res.trace.push_back(chi_now);
    res.epsilon_trace.push_back(state.epsilon);
    res.iterations = t + 1;
    const bool rank_one = rank_one_ratio(state.V) <= 1.0 + ctl.srcr_rank_tol;
    const bool settled = rel_close(chi_now, chi_prev, ctl.srcr_obj_tol);
    chi_prev = chi_now;
    if (rank_one && settled) {
      res.converged = true;
      break;
    }
  }
  res.V = state.V;
  res.chi = chi_prev;
  res.rank_ratio = rank_one_ratio(state.V);
  return res;
}

PassiveResult algorithm2(const ChannelSet& channels, std::span<const CMatrix> W,
                         std::span<const double> a_near, const SystemConfig& config,
                         const AngleGrid& grid, const CMatrix& V_init) {
  return algorithm2(noma_passive_model(channels, W, a_near, config, grid), config, V_init);
}

PhaseExtraction extract_phases(const CMatrix& V) {
  const auto top = conic::principal_eigpair(V);
  const Eigen::Index M = V.rows();
  PhaseExtraction out;
  out.v.resize(M);
  for (Eigen::Index m = 0; m < M; ++m) {
    const Complex e = top.vector(m);
    out.v(m) = std::abs(e) < 1e-12 ? Complex(1.0, 0.0) : std::conj(e) / std::abs(e);
  }
  out.fidelity = (V - lift_phases(out.v)).norm() / static_cast<double>(M * M);
  return out;
}

CVector random_phases(int m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  CVector v(m);
  for (int i = 0; i < m; ++i) v(i) = std::polar(1.0, phase(rng));
  return v;
}

}  // namespace risnoma
