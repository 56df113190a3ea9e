#pragma once

// Backend-neutral description of the small conic programs solved by the
// optimizers: Hermitian PSD matrix variables, bounded scalar variables,
// affine (in)equalities over Re Tr(A X) terms, real LMI blocks with affine
// entries, and convex quadratic bounds. solve() maps a problem onto the
// Clarabel interior-point solver through the real 2n x 2n embedding
// [[Re X, -Im X], [Im X, Re X]] of each complex block.

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "risnoma/types.hpp"

namespace risnoma::conic {

struct PsdVar {
  int id = -1;
};

struct ScalarVar {
  int id = -1;
};

// constant + sum_i c_i s_i + sum_j Re Tr(A_j X_j)
class Affine {
 public:
  Affine() = default;
  Affine(double constant) : constant_(constant) {}  // NOLINT(implicit)

  static Affine term(ScalarVar v, double coeff = 1.0);
  // Re Tr(A X). Only the Hermitian part of A contributes for Hermitian X.
  static Affine trace(PsdVar x, const CMatrix& a);

  Affine& operator+=(const Affine& other);
  Affine& operator-=(const Affine& other);
  Affine& operator*=(double s);

  friend Affine operator+(Affine lhs, const Affine& rhs) { return lhs += rhs; }
  friend Affine operator-(Affine lhs, const Affine& rhs) { return lhs -= rhs; }
  friend Affine operator*(Affine lhs, double s) { return lhs *= s; }
  friend Affine operator*(double s, Affine rhs) { return rhs *= s; }
  friend Affine operator-(Affine a) { return a *= -1.0; }

  double constant() const { return constant_; }
  const std::vector<std::pair<int, double>>& scalar_terms() const { return scalars_; }
  const std::vector<std::pair<int, CMatrix>>& trace_terms() const { return traces_; }

 private:
  double constant_ = 0.0;
  std::vector<std::pair<int, double>> scalars_;
  std::vector<std::pair<int, CMatrix>> traces_;
};

enum class Sense { kLessEqual, kEqual, kGreaterEqual };

struct LinearConstraint {
  Affine lhs;
  Sense sense = Sense::kGreaterEqual;
  Affine rhs;
  std::string label;
};

// Real symmetric dim x dim matrix of affine entries, constrained PSD.
// entries are row-major; only the upper triangle is read.
struct LmiConstraint {
  int dim = 0;
  std::vector<Affine> entries;
  std::string label;
};

// bound >= sum_i c_i * expr_i^2 with every c_i > 0.
struct QuadraticConstraint {
  Affine bound;
  std::vector<std::pair<double, Affine>> squares;
  std::string label;
};

struct PsdDecl {
  std::string name;
  int dim = 0;
};

struct ScalarDecl {
  std::string name;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

class SdpProblem {
 public:
  PsdVar add_psd(std::string name, int dim);
  ScalarVar add_scalar(std::string name,
                       double lower = -std::numeric_limits<double>::infinity(),
                       double upper = std::numeric_limits<double>::infinity());

  void maximize(Affine objective) { objective_ = std::move(objective); }

  void add_constraint(Affine lhs, Sense sense, Affine rhs, std::string label = {});
  void add_lmi(int dim, std::vector<Affine> entries, std::string label = {});
  void add_quadratic(Affine bound, std::vector<std::pair<double, Affine>> squares,
                     std::string label = {});

  const std::vector<PsdDecl>& psd_vars() const { return psd_; }
  const std::vector<ScalarDecl>& scalar_vars() const { return scalars_; }
  const Affine& objective() const { return objective_; }
  const std::vector<LinearConstraint>& linear() const { return linear_; }
  const std::vector<LmiConstraint>& lmis() const { return lmis_; }
  const std::vector<QuadraticConstraint>& quadratics() const { return quadratics_; }

  // Number of finite scalar bounds (each one is a separate inequality row).
  int bound_count() const;

 private:
  void check_refs(const Affine& e) const;

  std::vector<PsdDecl> psd_;
  std::vector<ScalarDecl> scalars_;
  Affine objective_;
  std::vector<LinearConstraint> linear_;
  std::vector<LmiConstraint> lmis_;
  std::vector<QuadraticConstraint> quadratics_;
};

enum class SdpStatus { kOptimal, kInfeasible, kUnbounded, kNumericalFailure };

const char* to_string(SdpStatus status);

struct SdpSolution {
  SdpStatus status = SdpStatus::kNumericalFailure;
  double objective = 0.0;
  std::vector<CMatrix> psd;
  std::vector<double> scalars;
  int iterations = 0;
  // Clarabel reported AlmostSolved: optimal at reduced accuracy.
  bool reduced_accuracy = false;
  // Largest absolute constraint violation of the returned point.
  double max_violation = 0.0;

  bool optimal() const { return status == SdpStatus::kOptimal; }
  const CMatrix& value(PsdVar x) const;
  double value(ScalarVar s) const;
  double value(const Affine& e) const;
};

struct SolverSettings {
  double tolerance = 1e-8;
  int max_iter = 200;
  bool verbose = false;
};

SdpSolution solve(const SdpProblem& problem, const SolverSettings& settings = {});

struct EigPair {
  double value = 0.0;
  CVector vector;
};

// Largest eigenvalue of the Hermitian part of X with a unit eigenvector whose
// largest-magnitude entry is real and positive. Ties resolve to the
// eigenvector the symmetric eigensolver returns last.
EigPair principal_eigpair(const CMatrix& X);

// Eigenvalues of the Hermitian part of X, ascending.
RVector hermitian_eigenvalues(const CMatrix& X);

}  // namespace risnoma::conic
