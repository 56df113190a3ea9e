#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace risnoma::testing {

CVector random_cvector(int n, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> nd(0.0, std::sqrt(scale / 2.0));
  CVector v(n);
  for (int i = 0; i < n; ++i) v(i) = Complex(nd(rng), nd(rng));
  return v;
}

CMatrix random_cmatrix(int rows, int cols, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> nd(0.0, std::sqrt(scale / 2.0));
  CMatrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = Complex(nd(rng), nd(rng));
  return m;
}

CVector random_unit_phases(int m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  CVector v(m);
  for (int i = 0; i < m; ++i) v(i) = std::polar(1.0, u(rng));
  return v;
}

CMatrix random_psd(int n, int rank, std::mt19937_64& rng) {
  const CMatrix B = random_cmatrix(n, rank, rng);
  return B * B.adjoint();
}

ChannelSet random_channels(int K, int n_tx, int m, std::mt19937_64& rng, double scale) {
  ChannelSet ch;
  ch.G = random_cmatrix(m, n_tx, rng, scale);
  for (int k = 0; k < K; ++k) {
    ch.g_near.push_back(random_cvector(m, rng, scale));
    ch.g_far.push_back(random_cvector(m, rng, scale));
  }
  return ch;
}

double vector_gain(const CVector& g, const CMatrix& G, const CVector& v, const CVector& w) {
  Complex s = 0.0;
  for (Eigen::Index m = 0; m < G.rows(); ++m) {
    Complex row = 0.0;
    for (Eigen::Index n = 0; n < G.cols(); ++n) row += G(m, n) * w(n);
    s += std::conj(g(m)) * v(m) * row;
  }
  return std::norm(s);
}

double vector_beampattern(const CVector& v, const std::vector<CVector>& w, const CMatrix& G,
                          double theta, double spacing_ratio) {
  CVector a(G.rows());
  for (Eigen::Index m = 0; m < a.size(); ++m)
    a(m) = std::polar(1.0, 2.0 * std::numbers::pi * spacing_ratio * static_cast<double>(m) *
                               std::sin(theta));
  double total = 0.0;
  for (const auto& wk : w) total += vector_gain(a, G, v, wk);
  return total;
}

double psk16_oracle(const std::vector<CVector>& w, const CMatrix& G,
                    const std::vector<double>& angles, double spacing_ratio) {
  const int M = static_cast<int>(G.rows());
  std::vector<int> idx(M, 0);
  double best = 0.0;
  CVector v(M);
  while (true) {
    for (int m = 0; m < M; ++m) v(m) = std::polar(1.0, 2.0 * std::numbers::pi * idx[m] / 16.0);
    double worst = std::numeric_limits<double>::infinity();
    for (double th : angles) worst = std::min(worst, vector_beampattern(v, w, G, th, spacing_ratio));
    best = std::max(best, worst);
    int pos = 1;
    while (pos < M && ++idx[pos] == 16) idx[pos++] = 0;
    if (pos >= M) break;
  }
  return best;
}

double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

SystemConfig single_cluster_config(int n_tx, int m) {
  SystemConfig c = profile_config("desk");
  c.n_tx = n_tx;
  c.n_ris = m;
  c.n_clusters = 1;
  c.r_min_near = 0.0;
  c.r_min_far = 0.0;
  c.target_angles = {c.target_angles.front()};
  c.target_radii = {c.target_radii.front()};
  c.cluster_angle_ranges = {c.cluster_angle_ranges.front()};
  c.beam_width = 0.01;  // one grid point: the target itself
  return c;
}

}  // namespace risnoma::testing

#include "risnoma/active_opt.hpp"
#include "risnoma/conic.hpp"
#include "risnoma/sensing.hpp"

namespace risnoma::testing {

namespace {

// a Tr(W Gamma^H V Gamma) / sigma^2 with Gamma built row by row.
double bilinear(double a, const CMatrix& W, const CVector& g, const CMatrix& G, const CMatrix& V,
                double noise) {
  CMatrix gamma(G.rows(), G.cols());
  for (Eigen::Index m = 0; m < G.rows(); ++m) gamma.row(m) = std::conj(g(m)) * G.row(m);
  return a * (W * gamma.adjoint() * V * gamma).trace().real() / noise;
}

const conic::LinearConstraint& find_linear(const conic::SdpProblem& p, const std::string& label) {
  for (const auto& c : p.linear())
    if (c.label == label) return c;
  throw std::runtime_error("no row " + label);
}

const conic::QuadraticConstraint& find_quadratic(const conic::SdpProblem& p,
                                                 const std::string& label) {
  for (const auto& c : p.quadratics())
    if (c.label == label) return c;
  throw std::runtime_error("no row " + label);
}

double squares_value(const conic::QuadraticConstraint& q, const conic::SdpSolution& s) {
  double total = 0.0;
  for (const auto& [c, e] : q.squares) total += c * s.value(e) * s.value(e);
  return total;
}

}  // namespace

SurrogateReport check_surrogates(int n_states, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  std::uniform_real_distribution<double> scale(0.1, 3.0);
  SurrogateReport rep;
  for (int t = 0; t < n_states; ++t) {
    SystemConfig c = profile_config("desk");
    c.n_clusters = 1 + t % 3;
    c.n_tx = 2 + t % 3;
    c.n_ris = 2 + t % 6;
    c.noise_power = 0.5;
    c.p_max = 2.0;
    c.cluster_angle_ranges.resize(c.n_clusters, c.cluster_angle_ranges.front());
    const ChannelSet ch = random_channels(c.n_clusters, c.n_tx, c.n_ris, rng);
    const CVector v = random_unit_phases(c.n_ris, rng);
    const CMatrix V = lift_phases(v);
    const AngleGrid grid = make_angle_grid(c);
    std::vector<CMatrix> W;
    std::vector<double> a;
    for (int k = 0; k < c.n_clusters; ++k) {
      W.push_back(random_psd(c.n_tx, 1 + k % 2, rng) * (c.p_max / (4.0 * c.n_clusters)));
      a.push_back(u(rng));
    }
    ScaState state = matched_sca_state(ch, V, c, W, a);
    for (auto& e : state.eta_fixed) e *= scale(rng);
    const ActiveProblem prob = build_relaxed_problem(ch, V, state, c, grid);

    conic::SdpSolution sol;
    sol.status = conic::SdpStatus::kOptimal;
    sol.scalars.assign(prob.problem.scalar_vars().size(), 0.0);
    sol.psd.resize(prob.problem.psd_vars().size());
    auto load = [&](const std::vector<CMatrix>& Wk, const std::vector<double>& ak) {
      for (int k = 0; k < c.n_clusters; ++k) {
        sol.psd[prob.W[k].id] = Wk[k] / prob.scale.power;
        sol.scalars[prob.a_near[k].id] = ak[k];
      }
    };

    for (int k = 0; k < c.n_clusters; ++k) {
      const std::string tag = std::to_string(k);
      const double e0 = state.eta_fixed[k];
      const auto& taylor = find_linear(prob.problem, "taylor_" + tag);
      ++rep.taylor_rows;
      for (int j = 0; j < 20; ++j) {
        const double eta = j == 0 ? e0 : e0 * 3.0 * u(rng);
        sol.scalars[prob.eta[k].id] = eta;
        const double sur = sol.value(taylor.lhs);
        const double rel = (sur - eta * eta) / (e0 * e0);
        if (j == 0)
          rep.taylor_tight = std::max(rep.taylor_tight, std::abs(rel));
        else
          rep.taylor_over = std::max(rep.taylor_over, rel);
      }

      for (const char* who : {"near", "far"}) {
        const auto& q = find_quadratic(prob.problem, std::string("agm_") + who + "_" + tag);
        const CVector& g = std::string(who) == "near" ? ch.g_near[k] : ch.g_far[k];
        ++rep.agm_rows;
        load(W, a);
        const double exact = bilinear(a[k], W[k], g, ch.G, V, c.noise_power);
        rep.agm_tight = std::max(rep.agm_tight, std::abs(squares_value(q, sol) - exact) / exact);
        for (int j = 0; j < 20; ++j) {
          std::vector<CMatrix> W2 = W;
          std::vector<double> a2 = a;
          W2[k] = random_psd(c.n_tx, 1, rng) * (c.p_max / 4.0);
          a2[k] = u(rng);
          load(W2, a2);
          const double prod = bilinear(a2[k], W2[k], g, ch.G, V, c.noise_power);
          rep.agm_under = std::max(rep.agm_under, (prod - squares_value(q, sol)) / prod);
        }
      }
    }
  }
  return rep;
}

}  // namespace risnoma::testing
