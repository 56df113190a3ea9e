#include <cmath>

#include <doctest.h>

#include "risnoma/active_opt.hpp"
#include "risnoma/errors.hpp"
#include "risnoma/joint_driver.hpp"
#include "risnoma/passive_opt.hpp"
#include "support.hpp"

using namespace risnoma;
using namespace risnoma::testing;

namespace {

struct Fixture {
  SystemConfig c = profile_config("desk");
  ChannelSet ch;
  AngleGrid grid;
  CMatrix V;
  ActiveResult active;

  explicit Fixture(std::uint64_t seed) {
    ch = build_scenario(c, seed).second;
    grid = make_angle_grid(c);
    auto rng = phase_rng(c, seed);
    const CVector v = random_phases(c.n_ris, rng);
    V = lift_phases(v);
    active = algorithm1(ch, V, c, grid);
  }
};

}  // namespace

TEST_CASE("epsilon update") {
  std::mt19937_64 rng(111);
  const CVector v = random_unit_phases(5, rng);
  CHECK(update_epsilon(v * v.adjoint(), 0.3) == doctest::Approx(1.0));
  CHECK(update_epsilon(CMatrix::Identity(4, 4), 0.1) == doctest::Approx(0.35));
  CMatrix two = CMatrix::Zero(4, 4);
  two(0, 0) = 2.0;
  two(2, 2) = 2.0;
  CHECK(update_epsilon(two, 0.0) == doctest::Approx(0.5));
  CHECK(rank_one_ratio(v * v.adjoint()) == doctest::Approx(1.0));
  CHECK(rank_one_ratio(CMatrix::Identity(4, 4)) == doctest::Approx(4.0));
}

TEST_CASE("SRCR problem structure and state checks") {
  const Fixture f(4);
  const PassiveModel model = noma_passive_model(f.ch, f.active.W, f.active.a_near, f.c, f.grid);
  CHECK(model.qos.size() == static_cast<std::size_t>(3 * f.c.n_clusters));
  SrcrState s{f.V, 0.0, 0.1, 0};
  const SrcrProblem p = build_srcr_problem(model, s);
  const int Q = static_cast<int>(f.grid.interested.size());
  CHECK(p.problem.linear().size() ==
        static_cast<std::size_t>(3 * f.c.n_clusters + Q + f.c.n_ris + 1));

  SrcrState bad = s;
  bad.epsilon = 1.5;
  CHECK_THROWS_AS(build_srcr_problem(model, bad), StateError);
  bad = s;
  bad.rho = 0.0;
  CHECK_THROWS_AS(build_srcr_problem(model, bad), StateError);
  bad = s;
  bad.V = CMatrix::Identity(3, 3);
  CHECK_THROWS_AS(build_srcr_problem(model, bad), ShapeError);
}

TEST_CASE("eigen cut: vacuous at eps 0, rank-one forcing at eps 1") {
  const Fixture f(5);
  const PassiveModel model = noma_passive_model(f.ch, f.active.W, f.active.a_near, f.c, f.grid);
  std::mt19937_64 rng(112);
  const int M = f.c.n_ris;
  auto cut_value = [&](double eps, const CMatrix& at, const CMatrix& X) {
    SrcrState s{at, eps, 0.1, 0};
    const SrcrProblem p = build_srcr_problem(model, s);
    conic::SdpSolution sol;
    sol.status = conic::SdpStatus::kOptimal;
    sol.scalars.assign(p.problem.scalar_vars().size(), 0.0);
    sol.psd = {X};
    const auto& row = p.problem.linear().back();
    REQUIRE(row.label == "eigen_cut");
    return sol.value(row.lhs) - sol.value(row.rhs);
  };
  for (int t = 0; t < 20; ++t) {
    // Unit-diagonal PSD of rank 2.
    const CVector a = random_unit_phases(M, rng), b = random_unit_phases(M, rng);
    const CMatrix X = 0.5 * (a * a.adjoint() + b * b.adjoint());
    const CMatrix at = random_psd(M, 2, rng);
    CHECK(cut_value(0.0, at, X) >= -1e-12);
    CHECK(cut_value(1.0, at, X) < 0.0);
    const CMatrix R = a * a.adjoint();
    CHECK(cut_value(1.0, R, R) == doctest::Approx(0.0).epsilon(1e-9).scale(M));
  }
}

TEST_CASE("accepted SRCR steps keep unit diagonal and raise eps") {
  const Fixture f(6);
  const PassiveModel model = noma_passive_model(f.ch, f.active.W, f.active.a_near, f.c, f.grid);
  SrcrState s{f.V, 0.0, f.c.controls.srcr_step, 0};
  for (int t = 0; t < 6; ++t) {
    const SrcrProblem p = build_srcr_problem(model, s);
    const conic::SdpSolution sol = conic::solve(p.problem);
    if (!sol.optimal()) {
      s.rho /= 2;
      s.epsilon = update_epsilon(s.V, s.rho);
      continue;
    }
    const CMatrix V = sol.value(p.V);
    for (int m = 0; m < f.c.n_ris; ++m) CHECK(std::abs(V(m, m) - 1.0) <= 1e-8);
    CHECK(conic::hermitian_eigenvalues(V)(0) >= -1e-7);
    const double next = update_epsilon(V, f.c.controls.srcr_step);
    CHECK(next >= s.epsilon - 1e-6);
    CHECK(next <= 1.0);
    s = {V, next, f.c.controls.srcr_step, t + 1};
  }
}

TEST_CASE("algorithm 2 returns a unit-modulus rank-one design") {
  const Fixture f(7);
  const PassiveModel model = noma_passive_model(f.ch, f.active.W, f.active.a_near, f.c, f.grid);
  PassiveResult r;
  try {
    r = algorithm2(model, f.c, f.V);
  } catch (const StallError& e) {
    FAIL("stalled: " << e.what());
  }
  CHECK(r.iterations <= f.c.controls.t2_max);
  for (int m = 0; m < f.c.n_ris; ++m) CHECK(std::abs(r.V(m, m) - 1.0) <= 1e-8);
  CHECK(r.trace.size() == static_cast<std::size_t>(r.iterations + 1));
  CHECK(r.accepted_trace.size() == static_cast<std::size_t>(r.iterations - r.rejected));
  for (double eps : r.epsilon_trace) {
    CHECK(eps >= 0.0);
    CHECK(eps <= 1.0);
  }
  if (r.converged) CHECK(r.rank_ratio <= 1.0 + f.c.controls.srcr_rank_tol);
  CHECK(r.chi == doctest::Approx(passive_objective(model, r.V)));
}

TEST_CASE("single element RIS") {
  SystemConfig c = single_cluster_config(2, 1);
  const auto [geo, ch] = build_scenario(c, 0);
  const AngleGrid grid = make_angle_grid(c);
  const CMatrix V = CMatrix::Ones(1, 1);
  const ActiveResult a = algorithm1(ch, V, c, grid);
  const PassiveResult r = algorithm2(ch, a.W, a.a_near, c, grid, V);
  CHECK(std::abs(r.V(0, 0) - Complex(1.0, 0.0)) <= 1e-7);
  CHECK(r.rank_ratio == doctest::Approx(1.0));
  CHECK(r.chi == doctest::Approx(a.chi).epsilon(1e-6));
}

TEST_CASE("phase extraction") {
  std::mt19937_64 rng(113);
  for (int t = 0; t < 20; ++t) {
    const int M = 2 + t % 10;
    const CVector v = random_unit_phases(M, rng);
    const PhaseExtraction e = extract_phases(lift_phases(v));
    const Complex rot = e.v(0) / v(0);
    CHECK((e.v - v * rot).norm() <= 1e-10);
    CHECK(e.fidelity <= 1e-12);
    for (int m = 0; m < M; ++m) CHECK(std::abs(std::abs(e.v(m)) - 1.0) <= 1e-14);

    CMatrix noise = random_cmatrix(M, M, rng) * 1e-6;
    noise = 0.5 * (noise + noise.adjoint());
    CHECK(extract_phases(lift_phases(v) + noise).fidelity <= 1e-3);
  }
  const PhaseExtraction id = extract_phases(CMatrix::Identity(4, 4));
  for (int m = 0; m < 4; ++m) CHECK(std::abs(id.v(m) - Complex(1.0, 0.0)) <= 1e-14);

  auto r1 = std::mt19937_64(9), r2 = std::mt19937_64(9);
  CHECK(random_phases(6, r1) == random_phases(6, r2));
}
