#include "risnoma/joint_driver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "risnoma/conic.hpp"
#include "risnoma/errors.hpp"

namespace risnoma {

namespace {

using conic::Affine;
using conic::Sense;

constexpr double kRankTol = 1e-5;
constexpr double kQosSlack = 1e-4;  // bits/s/Hz
constexpr int kRandomDraws = 64;

bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

std::vector<CMatrix> lift(std::span<const CVector> w) {
  std::vector<CMatrix> W;
  for (const auto& x : w) W.push_back(x * x.adjoint());
  return W;
}

CVector unit_direction(const CVector& x) {
  const double n = x.norm();
  if (n > 0.0) return x / n;
  CVector e = CVector::Zero(x.size());
  e(0) = 1.0;
  return e;
}

std::vector<CVector> principal_directions(std::span<const CMatrix> W) {
  std::vector<CVector> d;
  for (const auto& Wk : W) {
    if (Wk.norm() == 0.0) {
      d.push_back(unit_direction(CVector::Zero(Wk.rows())));
      continue;
    }
    d.push_back(conic::principal_eigpair(Wk).vector.normalized());
  }
  return d;
}

// Unit directions of w ~ CN(0, W_k), one per block.
std::vector<CVector> random_directions(std::span<const CMatrix> W, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  std::vector<CVector> d;
  for (const auto& Wk : W) {
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(Wk);
    const RVector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    CVector z(Wk.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = Complex(normal(rng), normal(rng));
    d.push_back(unit_direction(eig.eigenvectors() * root.asDiagonal() * z));
  }
  return d;
}

std::vector<CVector> vector_directions(std::span<const CVector> w) {
  std::vector<CVector> d;
  for (const auto& x : w) d.push_back(unit_direction(x));
  return d;
}

double max_diag_error(const CMatrix& V) {
  return (V.diagonal().real().array() - 1.0).abs().maxCoeff();
}

// Largest single-angle gain reachable with the full power budget.
double gain_reference(const CMatrix& V, const CMatrix& G, const AngleGrid& grid,
                      double spacing, double p_max) {
  double best = 0.0;
  for (double theta : grid.interested) {
    const CMatrix ups = sensing_cascade(theta, G, spacing);
    best = std::max(best, conic::hermitian_eigenvalues(ups.adjoint() * V * ups).maxCoeff());
  }
  return best > 0.0 ? p_max * best : 1.0;
}

// Gain of a unit beam d at angle theta, per unit of power.
double unit_beam_gain(const CMatrix& V, const CVector& d, const CMatrix& G, double theta,
                      double spacing) {
  const CMatrix D = d * d.adjoint();
  return beampattern_gain(V, std::span<const CMatrix>(&D, 1), G, theta, spacing);
}

double min_gain_of(const CMatrix& V, std::span<const CVector> w, const CMatrix& G,
                   const AngleGrid& grid, double spacing) {
  const auto W = lift(w);
  return min_gain(V, W, G, grid.interested, spacing).value;
}

bool noma_feasible(const NomaDesign& d, const ChannelSet& channels, const SystemConfig& config) {
  const BeamState s = BeamState::from_vectors(d.w, d.a_near, d.v);
  return qos_satisfied(rate_report(s, channels, config), config, kQosSlack);
}

std::vector<CMatrix> baseline_sdr_solve(const CMatrix& G, std::span<const CVector> users,
                                        std::span<const double> thresholds, const CMatrix& V,
                                        const SystemConfig& config, const AngleGrid& grid) {
  const int J = static_cast<int>(users.size());
  const int n = static_cast<int>(G.cols());
  const double p = config.p_max;
  const double gain_ref = gain_reference(V, G, grid, config.spacing_ratio, p);

  conic::SdpProblem prob;
  const auto chi = prob.add_scalar("chi", 0.0);
  std::vector<conic::PsdVar> W;
  for (int j = 0; j < J; ++j) W.push_back(prob.add_psd("W_" + std::to_string(j), n));
  prob.maximize(Affine::term(chi));

  for (std::size_t q = 0; q < grid.interested.size(); ++q) {
    const CMatrix ups = sensing_cascade(grid.interested[q], G, config.spacing_ratio);
    const CMatrix B = ups.adjoint() * V * ups * (p / gain_ref);
    Affine gain;
    for (int j = 0; j < J; ++j) gain += Affine::trace(W[j], B);
    prob.add_constraint(gain, Sense::kGreaterEqual, Affine::term(chi),
                        "beampattern_" + std::to_string(q));
  }
  Affine power;
  for (int j = 0; j < J; ++j) power += Affine::trace(W[j], CMatrix::Identity(n, n));
  prob.add_constraint(power, Sense::kLessEqual, 1.0, "power");

  for (int j = 0; j < J; ++j) {
    if (!(thresholds[j] > 0.0)) continue;
    const CMatrix H = user_quadratic(users[j], G, V) * (p / config.noise_power);
    Affine lhs = Affine::trace(W[j], H);
    for (int i = 0; i < J; ++i)
      if (i != j) lhs -= thresholds[j] * Affine::trace(W[i], H);
    prob.add_constraint(lhs, Sense::kGreaterEqual, thresholds[j], "sinr_" + std::to_string(j));
  }

  const auto& ctl = config.controls;
  const conic::SdpSolution sol = conic::solve(prob, {ctl.conic_tol, ctl.conic_max_iter, false});
  if (!sol.optimal()) {
    if (sol.status == conic::SdpStatus::kInfeasible)
      throw InfeasibleError("baseline relaxed problem is infeasible (QoS unattainable)");
    throw SolverError(std::string("baseline relaxed problem failed: ") +
                      conic::to_string(sol.status));
  }
  std::vector<CMatrix> out;
  for (int j = 0; j < J; ++j) {
    const CMatrix Wj = sol.value(W[j]) * p;
    out.push_back(0.5 * (Wj + Wj.adjoint()));
  }
  return out;
}

struct BaselineCandidate {
  std::vector<CVector> w;
  CVector v;
  double chi = 0.0;
};

std::optional<BaselineCandidate> baseline_power_allocation(
    const CMatrix& G, std::span<const CVector> users, std::span<const double> thresholds,
    const CVector& v, std::span<const CVector> directions, const SystemConfig& config,
    const AngleGrid& grid) {
  const int J = static_cast<int>(users.size());
  const CMatrix V = lift_phases(v);
  const double p = config.p_max;
  const double gain_ref = gain_reference(V, G, grid, config.spacing_ratio, p);

  conic::SdpProblem prob;
  const auto chi = prob.add_scalar("chi", 0.0);
  std::vector<conic::ScalarVar> pw;
  for (int j = 0; j < J; ++j) pw.push_back(prob.add_scalar("p_" + std::to_string(j), 0.0));
  prob.maximize(Affine::term(chi));

  Affine power;
  for (int j = 0; j < J; ++j) power += Affine::term(pw[j]);
  prob.add_constraint(power, Sense::kLessEqual, 1.0, "power");
  for (std::size_t q = 0; q < grid.interested.size(); ++q) {
    Affine gain;
    for (int j = 0; j < J; ++j)
      gain += Affine::term(pw[j], p / gain_ref *
                                      unit_beam_gain(V, directions[j], G, grid.interested[q],
                                                     config.spacing_ratio));
    prob.add_constraint(gain, Sense::kGreaterEqual, Affine::term(chi),
                        "beampattern_" + std::to_string(q));
  }
  for (int j = 0; j < J; ++j) {
    if (!(thresholds[j] > 0.0)) continue;
    Affine lhs;
    for (int i = 0; i < J; ++i) {
      const CMatrix D = directions[i] * directions[i].adjoint();
      const double g = effective_gain(V, D, users[j], G) * p / config.noise_power;
      lhs += Affine::term(pw[i], i == j ? g : -thresholds[j] * g);
    }
    prob.add_constraint(lhs, Sense::kGreaterEqual, thresholds[j], "sinr_" + std::to_string(j));
  }

  const auto& ctl = config.controls;
  const conic::SdpSolution sol = conic::solve(prob, {ctl.conic_tol, ctl.conic_max_iter, false});
  if (!sol.optimal()) return std::nullopt;
  BaselineCandidate c;
  c.v = v;
  for (int j = 0; j < J; ++j)
    c.w.push_back(std::sqrt(std::max(0.0, sol.value(pw[j])) * p) * directions[j]);
  c.chi = min_gain_of(V, c.w, G, grid, config.spacing_ratio);
  return c;
}

bool baseline_feasible(const BaselineCandidate& c, const CMatrix& G,
                       std::span<const CVector> users, std::span<const double> floors,
                       double noise_power) {
  BaselineDesign d{lift(c.w), c.w, lift_phases(c.v), c.v};
  const auto sinr = baseline_sinr(d, G, users, noise_power);
  for (std::size_t j = 0; j < sinr.size(); ++j)
    if (std::log2(1.0 + sinr[j]) < floors[j] - kQosSlack) return false;
  return true;
}

std::mt19937_64 randomization_rng(const SystemConfig& config, std::uint64_t seed) {
  return trial_rng(config.rng_seed ^ 0xc2b2ae3d27d4eb4fULL, seed);
}

}  // namespace

std::mt19937_64 phase_rng(const SystemConfig& config, std::uint64_t seed) {
  return trial_rng(config.rng_seed ^ 0x9e3779b97f4a7c15ULL, seed);
}

std::optional<NomaDesign> noma_power_allocation(const ChannelSet& channels, const CVector& v,
                                                std::span<const CVector> directions,
                                                const SystemConfig& config,
                                                const AngleGrid& grid) {
  const int K = channels.n_clusters();
  if (static_cast<int>(directions.size()) != K) throw ShapeError("one direction per cluster");
  if (v.size() != channels.n_ris()) throw ShapeError("phase vector does not match the RIS");
  const CMatrix V = lift_phases(v);
  const double p = config.p_max;
  const double snr = p / config.noise_power;
  const double r_near = sinr_threshold(config.r_min_near);
  const double r_far = sinr_threshold(config.r_min_far);
  const double margin = config.controls.power_split_margin;
  const double gain_ref = gain_reference(V, channels.G, grid, config.spacing_ratio, p);

  // gn(k, j): normalised gain of beam j at the RNU of cluster k; gf likewise.
  RMatrix gn(K, K);
  RMatrix gf(K, K);
  for (int j = 0; j < K; ++j) {
    const CMatrix D = directions[j] * directions[j].adjoint();
    for (int k = 0; k < K; ++k) {
      gn(k, j) = effective_gain(V, D, channels.g_near[k], channels.G) * snr;
      gf(k, j) = effective_gain(V, D, channels.g_far[k], channels.G) * snr;
    }
  }

  conic::SdpProblem prob;
  const auto chi = prob.add_scalar("chi", 0.0);
  std::vector<conic::ScalarVar> pn;
  std::vector<conic::ScalarVar> pf;
  for (int k = 0; k < K; ++k) {
    pn.push_back(prob.add_scalar("p_near_" + std::to_string(k), 0.0));
    pf.push_back(prob.add_scalar("p_far_" + std::to_string(k), 0.0));
  }
  prob.maximize(Affine::term(chi));
  auto beam = [&](int k) { return Affine::term(pn[k]) + Affine::term(pf[k]); };

  Affine power;
  for (int k = 0; k < K; ++k) power += beam(k);
  prob.add_constraint(power, Sense::kLessEqual, 1.0, "power");
  for (std::size_t q = 0; q < grid.interested.size(); ++q) {
    Affine gain;
    for (int k = 0; k < K; ++k)
      gain += beam(k) * (p / gain_ref *
                         unit_beam_gain(V, directions[k], channels.G, grid.interested[q],
                                        config.spacing_ratio));
    prob.add_constraint(gain, Sense::kGreaterEqual, Affine::term(chi),
                        "beampattern_" + std::to_string(q));
  }
  for (int k = 0; k < K; ++k) {
    const std::string tag = std::to_string(k);
    prob.add_constraint(Affine::term(pn[k]) - margin * beam(k), Sense::kGreaterEqual, 0.0,
                        "split_lo_" + tag);
    prob.add_constraint(Affine::term(pf[k]) - margin * beam(k), Sense::kGreaterEqual, 0.0,
                        "split_hi_" + tag);
    Affine inter_n;
    Affine inter_f;
    for (int j = 0; j < K; ++j) {
      if (j == k) continue;
      inter_n += beam(j) * gn(k, j);
      inter_f += beam(j) * gf(k, j);
    }
    if (r_near > 0.0)
      prob.add_constraint(Affine::term(pn[k], gn(k, k)) - r_near * inter_n,
                          Sense::kGreaterEqual, r_near, "near_" + tag);
    if (r_far > 0.0) {
      prob.add_constraint(Affine::term(pf[k], gn(k, k)) -
                              r_far * (Affine::term(pn[k], gn(k, k)) + inter_n),
                          Sense::kGreaterEqual, r_far, "far_at_near_" + tag);
      prob.add_constraint(Affine::term(pf[k], gf(k, k)) -
                              r_far * (Affine::term(pn[k], gf(k, k)) + inter_f),
                          Sense::kGreaterEqual, r_far, "far_at_far_" + tag);
    }
  }

  const auto& ctl = config.controls;
  const conic::SdpSolution sol = conic::solve(prob, {ctl.conic_tol, ctl.conic_max_iter, false});
  if (!sol.optimal()) return std::nullopt;

  NomaDesign d;
  d.v = v;
  for (int k = 0; k < K; ++k) {
    const double near = std::max(0.0, sol.value(pn[k]));
    const double far = std::max(0.0, sol.value(pf[k]));
    const double total = near + far;
    d.a_near.push_back(total > 0.0 ? std::clamp(near / total, margin, 1.0 - margin) : 0.5);
    d.w.push_back(std::sqrt(total * p) * directions[k]);
  }
  d.chi = min_gain_of(V, d.w, channels.G, grid, config.spacing_ratio);
  return d;
}

JointResult algorithm3(const ChannelSet& channels, const SystemConfig& config,
                       std::uint64_t seed) {
  config.validate();
  const AngleGrid grid = make_angle_grid(config);
  const auto& ctl = config.controls;
  auto rng = phase_rng(config, seed);
  const CVector v_init = random_phases(channels.n_ris(), rng);
  auto draw_rng = randomization_rng(config, seed);

  JointResult res;
  auto& diag = res.diagnostics;
  std::optional<NomaDesign> inc;
  auto consider = [&](std::optional<NomaDesign> cand, const char* what, int t) {
    if (!cand) {
      diag.events.push_back("outer " + std::to_string(t) + ": " + what + " power LP infeasible");
      return false;
    }
    if (!noma_feasible(*cand, channels, config)) {
      diag.events.push_back("outer " + std::to_string(t) + ": " + what + " violates QoS");
      return false;
    }
    if (inc && cand->chi < inc->chi) return false;
    inc = std::move(cand);
    return true;
  };

  // Phases from a passive step whose old beams no longer fit get one active re-solve.
  std::optional<CVector> pending;
  for (int t = 1; t <= ctl.t3_max; ++t) {
    const bool exploring = pending.has_value();
    const CVector v_cur = exploring ? *pending : (inc ? inc->v : v_init);
    pending.reset();
    const CMatrix V = lift_phases(v_cur);
    try {
      std::optional<ScaState> warm;
      if (inc && !exploring) {
        const auto W_inc = lift(inc->w);
        warm = matched_sca_state(channels, V, config, W_inc, inc->a_near);
      }
      const ActiveResult act = algorithm1(channels, V, config, grid, warm);
      diag.active_traces.push_back(act.trace);
      diag.active_rank_ratios.push_back(act.rank_ratio);
      diag.active_phase_one.push_back(act.phase_one);
      if (act.stopped_early)
        diag.events.push_back("outer " + std::to_string(t) + ": active SCA stopped early");
      const double worst = *std::max_element(act.rank_ratio.begin(), act.rank_ratio.end());
      if (worst > kRankTol)
        diag.events.push_back("outer " + std::to_string(t) +
                              ": relaxed W not rank one (lambda2/lambda1 = " +
                              std::to_string(worst) + "), principal beams re-powered");
      const bool accepted = consider(
          noma_power_allocation(channels, v_cur, principal_directions(act.W), config, grid),
          "active", t);
      if (!accepted && worst > kRankTol) {
        std::optional<NomaDesign> best;
        for (int r = 0; r < kRandomDraws; ++r) {
          auto cand = noma_power_allocation(channels, v_cur, random_directions(act.W, draw_rng),
                                            config, grid);
          if (cand && noma_feasible(*cand, channels, config) && (!best || cand->chi > best->chi))
            best = std::move(cand);
        }
        diag.events.push_back("outer " + std::to_string(t) + ": Gaussian randomization " +
                              (best ? "found" : "did not find") + " a feasible beam set");
        if (best) consider(std::move(best), "randomized", t);
      }
      if (!inc) throw InfeasibleError("no rank-one beamformer meets the QoS floors");

      const auto W_inc = lift(inc->w);
      PassiveResult pas;
      try {
        pas = algorithm2(channels, W_inc, inc->a_near, config, grid, V);
      } catch (const StallError& e) {
        diag.events.push_back("outer " + std::to_string(t) + ": " + e.what());
        pas.V = e.best();
        pas.chi = e.best_objective();
        pas.rank_ratio = rank_one_ratio(pas.V);
      }
      diag.passive_traces.push_back(pas.trace);
      diag.passive_accepted_traces.push_back(pas.accepted_trace);
      diag.passive_rank_ratios.push_back(pas.rank_ratio);
      diag.passive_diag_errors.push_back(max_diag_error(pas.V));
      diag.passive_converged.push_back(pas.converged);
      const PhaseExtraction ph = extract_phases(pas.V);
      diag.phase_fidelity.push_back(ph.fidelity);
      auto cand = noma_power_allocation(channels, ph.v, vector_directions(inc->w), config, grid);
      const bool usable = cand && noma_feasible(*cand, channels, config);
      consider(std::move(cand), "passive", t);
      if (!usable && !exploring) pending = ph.v;
    } catch (const InfeasibleError&) {
      if (!inc) throw;
      if (!exploring) {
        diag.events.push_back("outer " + std::to_string(t) + ": infeasible subproblem, stopping");
        break;
      }
      diag.events.push_back("outer " + std::to_string(t) +
                            ": infeasible at passive phases, back to incumbent");
    } catch (const Error& e) {
      if (!inc) throw;
      if (!exploring) {
        diag.events.push_back("outer " + std::to_string(t) + ": " + e.what() + ", stopping");
        break;
      }
      diag.events.push_back("outer " + std::to_string(t) + ": " + e.what() +
                            " at passive phases, back to incumbent");
    }
    res.outer_trace.push_back(inc->chi);
    res.outer_iterations = t;
    const std::size_t n = res.outer_trace.size();
    if (!pending && n > 1 && rel_close(res.outer_trace[n - 1], res.outer_trace[n - 2], ctl.outer_tol)) {
      res.converged = true;
      break;
    }
  }

  res.state = BeamState::from_vectors(inc->w, inc->a_near, inc->v);
  res.chi = inc->chi;
  return res;
}

std::vector<double> baseline_sinr(const BaselineDesign& design, const CMatrix& G,
                                  std::span<const CVector> users, double noise_power) {
  if (design.W.size() != users.size()) throw ShapeError("one beam per user");
  std::vector<double> out;
  for (std::size_t j = 0; j < users.size(); ++j) {
    double signal = 0.0;
    double inter = 0.0;
    for (std::size_t i = 0; i < users.size(); ++i) {
      const double g = effective_gain(design.V, design.W[i], users[j], G);
      (i == j ? signal : inter) += g;
    }
    out.push_back(signal / (inter + noise_power));
  }
  return out;
}

BaselineResult baseline_ris_isac(const CMatrix& G, std::span<const CVector> users,
                                 std::span<const double> rate_floors,
                                 const SystemConfig& config, std::uint64_t seed) {
  config.validate();
  if (users.empty()) throw ShapeError("baseline needs at least one user");
  if (rate_floors.size() != users.size()) throw ShapeError("one rate floor per user");
  const AngleGrid grid = make_angle_grid(config);
  const auto& ctl = config.controls;
  std::vector<double> thresholds;
  for (double r : rate_floors) thresholds.push_back(sinr_threshold(r));
  auto rng = phase_rng(config, seed);
  const CVector v_init = random_phases(static_cast<int>(G.rows()), rng);
  auto draw_rng = randomization_rng(config, seed);

  BaselineResult res;
  auto& diag = res.diagnostics;
  std::optional<BaselineCandidate> inc;
  auto consider = [&](std::optional<BaselineCandidate> cand, const char* what, int t) {
    if (!cand) {
      diag.events.push_back("outer " + std::to_string(t) + ": " + what + " power LP infeasible");
      return false;
    }
    if (!baseline_feasible(*cand, G, users, rate_floors, config.noise_power)) {
      diag.events.push_back("outer " + std::to_string(t) + ": " + what + " violates QoS");
      return false;
    }
    if (inc && cand->chi < inc->chi) return false;
    inc = std::move(cand);
    return true;
  };

  // Phases from a passive step whose old beams no longer fit get one active re-solve.
  std::optional<CVector> pending;
  for (int t = 1; t <= ctl.t3_max; ++t) {
    const bool exploring = pending.has_value();
    const CVector v_cur = exploring ? *pending : (inc ? inc->v : v_init);
    pending.reset();
    const CMatrix V = lift_phases(v_cur);
    try {
      const std::vector<CMatrix> W = baseline_sdr_solve(G, users, thresholds, V, config, grid);
      std::vector<double> ratios;
      for (const auto& Wj : W) ratios.push_back(second_eigen_ratio(Wj));
      diag.active_rank_ratios.push_back(ratios);
      const double worst = *std::max_element(ratios.begin(), ratios.end());
      if (worst > kRankTol)
        diag.events.push_back("outer " + std::to_string(t) +
                              ": relaxed W not rank one (lambda2/lambda1 = " +
                              std::to_string(worst) + "), principal beams re-powered");
      const bool accepted =
          consider(baseline_power_allocation(G, users, thresholds, v_cur,
                                             principal_directions(W), config, grid),
                   "active", t);
      if (!accepted && worst > kRankTol) {
        std::optional<BaselineCandidate> best;
        for (int r = 0; r < kRandomDraws; ++r) {
          auto cand = baseline_power_allocation(G, users, thresholds, v_cur,
                                                random_directions(W, draw_rng), config, grid);
          if (cand && baseline_feasible(*cand, G, users, rate_floors, config.noise_power) &&
              (!best || cand->chi > best->chi))
            best = std::move(cand);
        }
        diag.events.push_back("outer " + std::to_string(t) + ": Gaussian randomization " +
                              (best ? "found" : "did not find") + " a feasible beam set");
        if (best) consider(std::move(best), "randomized", t);
      }
      if (!inc) throw InfeasibleError("no rank-one beamformer meets the QoS floors");

      PassiveModel model;
      const auto W_inc = lift(inc->w);
      for (std::size_t j = 0; j < users.size(); ++j) {
        const CMatrix gam = cascaded_channel(users[j], G);
        CMatrix A = gam * W_inc[j] * gam.adjoint();
        for (std::size_t i = 0; i < users.size(); ++i)
          if (i != j) A -= thresholds[j] * (gam * W_inc[i] * gam.adjoint());
        if (thresholds[j] > 0.0)
          model.qos.push_back({A / config.noise_power, thresholds[j], "sinr_" + std::to_string(j)});
      }
      add_beampattern_terms(model, G, W_inc, grid, config.spacing_ratio);

      PassiveResult pas;
      try {
        pas = algorithm2(model, config, V);
      } catch (const StallError& e) {
        diag.events.push_back("outer " + std::to_string(t) + ": " + e.what());
        pas.V = e.best();
        pas.chi = e.best_objective();
        pas.rank_ratio = rank_one_ratio(pas.V);
      }
      diag.passive_traces.push_back(pas.trace);
      diag.passive_accepted_traces.push_back(pas.accepted_trace);
      diag.passive_rank_ratios.push_back(pas.rank_ratio);
      diag.passive_diag_errors.push_back(max_diag_error(pas.V));
      diag.passive_converged.push_back(pas.converged);
      const PhaseExtraction ph = extract_phases(pas.V);
      diag.phase_fidelity.push_back(ph.fidelity);
      auto cand = baseline_power_allocation(G, users, thresholds, ph.v,
                                            vector_directions(inc->w), config, grid);
      const bool usable =
          cand && baseline_feasible(*cand, G, users, rate_floors, config.noise_power);
      consider(std::move(cand), "passive", t);
      if (!usable && !exploring) pending = ph.v;
    } catch (const InfeasibleError&) {
      if (!inc) throw;
      if (!exploring) {
        diag.events.push_back("outer " + std::to_string(t) + ": infeasible subproblem, stopping");
        break;
      }
      diag.events.push_back("outer " + std::to_string(t) +
                            ": infeasible at passive phases, back to incumbent");
    } catch (const Error& e) {
      if (!inc) throw;
      if (!exploring) {
        diag.events.push_back("outer " + std::to_string(t) + ": " + e.what() + ", stopping");
        break;
      }
      diag.events.push_back("outer " + std::to_string(t) + ": " + e.what() +
                            " at passive phases, back to incumbent");
    }
    res.outer_trace.push_back(inc->chi);
    res.outer_iterations = t;
    const std::size_t n = res.outer_trace.size();
    if (!pending && n > 1 && rel_close(res.outer_trace[n - 1], res.outer_trace[n - 2], ctl.outer_tol)) {
      res.converged = true;
      break;
    }
  }

  res.design = BaselineDesign{lift(inc->w), inc->w, lift_phases(inc->v), inc->v};
  res.chi = inc->chi;
  return res;
}

BaselineResult baseline_ris_isac(const ChannelSet& channels, const SystemConfig& config,
                                 std::uint64_t seed) {
  const std::vector<CVector> users = channels.all_users();
  std::vector<double> floors(users.size(), config.r_min_far);
  std::fill(floors.begin(), floors.begin() + channels.n_clusters(), config.r_min_near);
  return baseline_ris_isac(channels.G, users, floors, config, seed);
}

}  // namespace risnoma
