#include "risnoma/conic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "risnoma/errors.hpp"

extern "C" {

struct ShimSettings {
  double tol_gap_abs;
  double tol_gap_rel;
  double tol_feas;
  std::uint32_t max_iter;
  int verbose;
};

struct ShimResult {
  int status;
  double objective;
  std::uint32_t iterations;
  double primal_residual;
  double dual_residual;
};

int risnoma_clarabel_solve(std::size_t n, std::size_t m, const double* q,
                           const std::size_t* a_colptr, const std::size_t* a_rowval,
                           const double* a_nzval, const double* b, std::size_t n_cones,
                           const int* cone_types, const std::size_t* cone_dims,
                           const ShimSettings* settings, double* x_out, double* z_out,
                           ShimResult* result);

void openblas_set_num_threads(int num_threads);
}

namespace risnoma::conic {

namespace {

constexpr int kConeZero = 0;
constexpr int kConeNonneg = 1;
constexpr int kConeSoc = 2;
constexpr int kConePsdTriangle = 3;

// Clarabel status codes (see third_party/clarabel_shim/src/lib.rs).
constexpr int kSolved = 1;
constexpr int kPrimalInfeasible = 2;
constexpr int kDualInfeasible = 3;
constexpr int kAlmostSolved = 4;
constexpr int kAlmostPrimalInfeasible = 5;
constexpr int kAlmostDualInfeasible = 6;

const double kSqrt2 = std::sqrt(2.0);

CMatrix hermitian_part(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }

// Column layout of the real decision vector: scalars first, then for each
// n x n Hermitian block its n^2 real parameters (diagonal, then Re/Im of the
// strict upper triangle, row by row).
class Layout {
 public:
  explicit Layout(const SdpProblem& p) {
    int offset = static_cast<int>(p.scalar_vars().size());
    for (const auto& decl : p.psd_vars()) {
      block_offset_.push_back(offset);
      block_dim_.push_back(decl.dim);
      offset += decl.dim * decl.dim;
    }
    n_ = offset;
  }

  int size() const { return n_; }
  int dim(int block) const { return block_dim_[block]; }
  int diag(int block, int i) const { return block_offset_[block] + i; }
  // Index of Re X_ij (part = 0) or Im X_ij (part = 1), i < j.
  int off(int block, int i, int j, int part) const {
    const int n = block_dim_[block];
    // position of (i, j) among strict-upper pairs in row-major order
    const int pos = i * n - i * (i + 1) / 2 + (j - i - 1);
    return block_offset_[block] + n + 2 * pos + part;
  }

 private:
  std::vector<int> block_offset_;
  std::vector<int> block_dim_;
  int n_ = 0;
};

// A sparse real row: constant + sum coeff * x[col].
struct Row {
  double constant = 0.0;
  std::map<int, double> coeffs;

  void add(int col, double v) {
    if (v != 0.0) coeffs[col] += v;
  }
  Row& scale(double s) {
    constant *= s;
    for (auto& [c, v] : coeffs) v *= s;
    return *this;
  }
};

Row lower(const Affine& e, const Layout& layout) {
  Row r;
  r.constant = e.constant();
  for (const auto& [id, c] : e.scalar_terms()) r.add(id, c);
  for (const auto& [block, a_raw] : e.trace_terms()) {
    const CMatrix a = hermitian_part(a_raw);
    const int n = layout.dim(block);
    for (int i = 0; i < n; ++i) {
      r.add(layout.diag(block, i), a(i, i).real());
      for (int j = i + 1; j < n; ++j) {
        r.add(layout.off(block, i, j, 0), 2.0 * a(i, j).real());
        r.add(layout.off(block, i, j, 1), 2.0 * a(i, j).imag());
      }
    }
  }
  return r;
}

double evaluate(const Row& r, const std::vector<double>& x) {
  double v = r.constant;
  for (const auto& [c, coeff] : r.coeffs) v += coeff * x[c];
  return v;
}

// Accumulates rows of A x + s = b cone by cone. For a row s_i = e_i(x) we
// store A_i = -coeffs(e_i), b_i = constant(e_i).
class ConeBuilder {
 public:
  void push_cone(int type, const std::vector<Row>& rows, std::size_t dim) {
    for (const auto& r : rows) {
      for (const auto& [c, v] : r.coeffs) triplets_.emplace_back(c, m_, -v);
      b_.push_back(r.constant);
      ++m_;
    }
    types_.push_back(type);
    dims_.push_back(dim);
  }

  std::size_t rows() const { return m_; }
  const std::vector<double>& b() const { return b_; }
  const std::vector<int>& types() const { return types_; }
  const std::vector<std::size_t>& dims() const { return dims_; }

  void to_csc(int n, std::vector<std::size_t>& colptr, std::vector<std::size_t>& rowval,
              std::vector<double>& nzval) const {
    auto sorted = triplets_;
    std::sort(sorted.begin(), sorted.end(), [](const auto& l, const auto& r) {
      return std::tie(std::get<0>(l), std::get<1>(l)) < std::tie(std::get<0>(r), std::get<1>(r));
    });
    colptr.assign(n + 1, 0);
    rowval.clear();
    nzval.clear();
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      const auto [c, r, v] = sorted[k];
      if (!rowval.empty() && k > 0 && std::get<0>(sorted[k - 1]) == c &&
          std::get<1>(sorted[k - 1]) == r) {
        nzval.back() += v;
        continue;
      }
      rowval.push_back(r);
      nzval.push_back(v);
      colptr[c + 1]++;
    }
    for (int c = 0; c < n; ++c) colptr[c + 1] += colptr[c];
  }

 private:
  std::vector<std::tuple<int, std::size_t, double>> triplets_;
  std::vector<double> b_;
  std::vector<int> types_;
  std::vector<std::size_t> dims_;
  std::size_t m_ = 0;
};

// Scaled upper-triangle, column-major vectorisation (Clarabel PSDTriangle).
template <typename EntryFn>
std::vector<Row> svec_rows(int dim, EntryFn entry) {
  std::vector<Row> rows;
  rows.reserve(dim * (dim + 1) / 2);
  for (int col = 0; col < dim; ++col) {
    for (int row = 0; row <= col; ++row) {
      Row r = entry(row, col);
      if (row != col) r.scale(kSqrt2);
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

// Entry (r, c) of [[Re X, -Im X], [Im X, Re X]] as a row over the parameters.
Row embedding_entry(const Layout& layout, int block, int r, int c) {
  const int n = layout.dim(block);
  Row row;
  const bool r_top = r < n;
  const bool c_top = c < n;
  const int i = r_top ? r : r - n;
  const int j = c_top ? c : c - n;
  if (r_top == c_top) {  // Re X_ij
    if (i == j) {
      row.add(layout.diag(block, i), 1.0);
    } else if (i < j) {
      row.add(layout.off(block, i, j, 0), 1.0);
    } else {
      row.add(layout.off(block, j, i, 0), 1.0);
    }
    return row;
  }
  // Top-right holds -Im X_ij, bottom-left holds Im X_ij.
  const double sign = r_top ? -1.0 : 1.0;
  if (i < j) {
    row.add(layout.off(block, i, j, 1), sign);
  } else if (i > j) {
    row.add(layout.off(block, j, i, 1), -sign);  // Im X_ij = -Im X_ji
  }
  return row;
}

CMatrix unpack_block(const Layout& layout, int block, const std::vector<double>& x) {
  const int n = layout.dim(block);
  CMatrix X(n, n);
  for (int i = 0; i < n; ++i) {
    X(i, i) = Complex(x[layout.diag(block, i)], 0.0);
    for (int j = i + 1; j < n; ++j) {
      const Complex z(x[layout.off(block, i, j, 0)], x[layout.off(block, i, j, 1)]);
      X(i, j) = z;
      X(j, i) = std::conj(z);
    }
  }
  return X;
}

double min_eigenvalue(const RMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<RMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace

// --- Affine ---------------------------------------------------------------

Affine Affine::term(ScalarVar v, double coeff) {
  Affine e;
  e.scalars_.emplace_back(v.id, coeff);
  return e;
}

Affine Affine::trace(PsdVar x, const CMatrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("trace coefficient must be square");
  Affine e;
  e.traces_.emplace_back(x.id, a);
  return e;
}

Affine& Affine::operator+=(const Affine& other) {
  constant_ += other.constant_;
  scalars_.insert(scalars_.end(), other.scalars_.begin(), other.scalars_.end());
  traces_.insert(traces_.end(), other.traces_.begin(), other.traces_.end());
  return *this;
}

Affine& Affine::operator-=(const Affine& other) {
  Affine neg = other;
  neg *= -1.0;
  return *this += neg;
}

Affine& Affine::operator*=(double s) {
  constant_ *= s;
  for (auto& t : scalars_) t.second *= s;
  for (auto& t : traces_) t.second *= s;
  return *this;
}

// --- SdpProblem -----------------------------------------------------------

PsdVar SdpProblem::add_psd(std::string name, int dim) {
  if (dim < 1) throw ShapeError("PSD variable '" + name + "' needs dimension >= 1");
  psd_.push_back({std::move(name), dim});
  return PsdVar{static_cast<int>(psd_.size()) - 1};
}

ScalarVar SdpProblem::add_scalar(std::string name, double lower, double upper) {
  if (lower > upper) throw DomainError("scalar '" + name + "' has empty bounds");
  scalars_.push_back({std::move(name), lower, upper});
  return ScalarVar{static_cast<int>(scalars_.size()) - 1};
}

void SdpProblem::check_refs(const Affine& e) const {
  for (const auto& [id, c] : e.scalar_terms()) {
    if (id < 0 || id >= static_cast<int>(scalars_.size()))
      throw ShapeError("affine expression references an undeclared scalar");
  }
  for (const auto& [id, a] : e.trace_terms()) {
    if (id < 0 || id >= static_cast<int>(psd_.size()))
      throw ShapeError("affine expression references an undeclared PSD variable");
    if (a.rows() != psd_[id].dim)
      throw ShapeError("trace coefficient does not match '" + psd_[id].name + "'");
  }
}

void SdpProblem::add_constraint(Affine lhs, Sense sense, Affine rhs, std::string label) {
  check_refs(lhs);
  check_refs(rhs);
  linear_.push_back({std::move(lhs), sense, std::move(rhs), std::move(label)});
}

void SdpProblem::add_lmi(int dim, std::vector<Affine> entries, std::string label) {
  if (dim < 1 || static_cast<int>(entries.size()) != dim * dim)
    throw ShapeError("LMI entries must form a dim x dim matrix");
  for (const auto& e : entries) check_refs(e);
  lmis_.push_back({dim, std::move(entries), std::move(label)});
}

void SdpProblem::add_quadratic(Affine bound, std::vector<std::pair<double, Affine>> squares,
                               std::string label) {
  check_refs(bound);
  for (const auto& [c, e] : squares) {
    if (!(c > 0.0)) throw DomainError("quadratic weights must be positive");
    check_refs(e);
  }
  quadratics_.push_back({std::move(bound), std::move(squares), std::move(label)});
}

int SdpProblem::bound_count() const {
  int n = 0;
  for (const auto& s : scalars_) {
    n += std::isfinite(s.lower) ? 1 : 0;
    n += std::isfinite(s.upper) ? 1 : 0;
  }
  return n;
}

// --- SdpSolution ----------------------------------------------------------

const char* to_string(SdpStatus status) {
  switch (status) {
    case SdpStatus::kOptimal: return "optimal";
    case SdpStatus::kInfeasible: return "infeasible";
    case SdpStatus::kUnbounded: return "unbounded";
    case SdpStatus::kNumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

const CMatrix& SdpSolution::value(PsdVar x) const {
  if (!optimal()) throw SolverError("no values: solution status is not optimal");
  return psd.at(x.id);
}

double SdpSolution::value(ScalarVar s) const {
  if (!optimal()) throw SolverError("no values: solution status is not optimal");
  return scalars.at(s.id);
}

double SdpSolution::value(const Affine& e) const {
  double v = e.constant();
  for (const auto& [id, c] : e.scalar_terms()) v += c * value(ScalarVar{id});
  for (const auto& [id, a] : e.trace_terms())
    v += (a * value(PsdVar{id})).trace().real();
  return v;
}

// --- solve ----------------------------------------------------------------

SdpSolution solve(const SdpProblem& problem, const SolverSettings& settings) {
  const Layout layout(problem);
  const int n = layout.size();

  std::vector<Row> zero_rows;
  std::vector<Row> nonneg_rows;
  for (const auto& c : problem.linear()) {
    Row diff = lower(c.lhs - c.rhs, layout);
    switch (c.sense) {
      case Sense::kEqual: zero_rows.push_back(std::move(diff)); break;
      case Sense::kGreaterEqual: nonneg_rows.push_back(std::move(diff)); break;
      case Sense::kLessEqual: nonneg_rows.push_back(std::move(diff.scale(-1.0))); break;
    }
  }
  for (std::size_t i = 0; i < problem.scalar_vars().size(); ++i) {
    const auto& s = problem.scalar_vars()[i];
    if (std::isfinite(s.lower)) {
      Row r;
      r.constant = -s.lower;
      r.add(static_cast<int>(i), 1.0);
      nonneg_rows.push_back(std::move(r));
    }
    if (std::isfinite(s.upper)) {
      Row r;
      r.constant = s.upper;
      r.add(static_cast<int>(i), -1.0);
      nonneg_rows.push_back(std::move(r));
    }
  }

  ConeBuilder cones;
  if (!zero_rows.empty()) cones.push_cone(kConeZero, zero_rows, zero_rows.size());
  if (!nonneg_rows.empty()) cones.push_cone(kConeNonneg, nonneg_rows, nonneg_rows.size());

  // bound >= |u|^2  <=>  || (bound - 1, 2u) || <= bound + 1
  for (const auto& qc : problem.quadratics()) {
    const Row bound = lower(qc.bound, layout);
    std::vector<Row> rows;
    Row head = bound;
    head.constant += 1.0;
    Row second = bound;
    second.constant -= 1.0;
    rows.push_back(std::move(head));
    rows.push_back(std::move(second));
    for (const auto& [w, e] : qc.squares) {
      Row r = lower(e, layout);
      rows.push_back(std::move(r.scale(2.0 * std::sqrt(w))));
    }
    cones.push_cone(kConeSoc, rows, rows.size());
  }

  for (const auto& lmi : problem.lmis()) {
    auto rows = svec_rows(lmi.dim, [&](int r, int c) {
      return lower(lmi.entries[r * lmi.dim + c], layout);
    });
    cones.push_cone(kConePsdTriangle, rows, lmi.dim);
  }

  for (std::size_t blk = 0; blk < problem.psd_vars().size(); ++blk) {
    const int b = static_cast<int>(blk);
    const int dim = 2 * layout.dim(b);
    auto rows = svec_rows(dim, [&](int r, int c) { return embedding_entry(layout, b, r, c); });
    cones.push_cone(kConePsdTriangle, rows, dim);
  }

  // maximize f  <=>  minimize -f
  const Row objective = lower(problem.objective(), layout);
  std::vector<double> q(n, 0.0);
  for (const auto& [c, v] : objective.coeffs) q[c] = -v;

  std::vector<std::size_t> colptr;
  std::vector<std::size_t> rowval;
  std::vector<double> nzval;
  cones.to_csc(n, colptr, rowval, nzval);

  const std::size_t m = cones.rows();
  std::vector<double> x(n, 0.0);
  std::vector<double> z(m, 0.0);
  ShimSettings shim{settings.tolerance, settings.tolerance, settings.tolerance,
                    static_cast<std::uint32_t>(settings.max_iter), settings.verbose ? 1 : 0};
  ShimResult result{};
  // Single-threaded BLAS: trials are parallelised one level up.
  static std::once_flag blas_once;
  std::call_once(blas_once, [] { openblas_set_num_threads(1); });
  const int rc = risnoma_clarabel_solve(
      static_cast<std::size_t>(n), m, q.data(), colptr.data(), rowval.data(), nzval.data(),
      cones.b().data(), cones.types().size(), cones.types().data(), cones.dims().data(), &shim,
      x.data(), z.data(), &result);
  if (rc != 0) throw SolverError("conic backend rejected the problem (code " + std::to_string(rc) + ")");

  SdpSolution sol;
  sol.iterations = static_cast<int>(result.iterations);
  switch (result.status) {
    case kSolved: sol.status = SdpStatus::kOptimal; break;
    case kAlmostSolved:
      sol.status = SdpStatus::kOptimal;
      sol.reduced_accuracy = true;
      break;
    case kPrimalInfeasible:
    case kAlmostPrimalInfeasible: sol.status = SdpStatus::kInfeasible; break;
    case kDualInfeasible:
    case kAlmostDualInfeasible: sol.status = SdpStatus::kUnbounded; break;
    default: sol.status = SdpStatus::kNumericalFailure; break;
  }
  if (!sol.optimal()) return sol;

  sol.scalars.assign(x.begin(), x.begin() + problem.scalar_vars().size());
  for (std::size_t blk = 0; blk < problem.psd_vars().size(); ++blk)
    sol.psd.push_back(unpack_block(layout, static_cast<int>(blk), x));
  sol.objective = evaluate(objective, x);

  // Post-check of the returned point against every constraint.
  double worst = 0.0;
  for (const auto& r : zero_rows) worst = std::max(worst, std::abs(evaluate(r, x)));
  for (const auto& r : nonneg_rows) worst = std::max(worst, -evaluate(r, x));
  for (const auto& qc : problem.quadratics()) {
    double rhs = 0.0;
    for (const auto& [w, e] : qc.squares) {
      const double v = evaluate(lower(e, layout), x);
      rhs += w * v * v;
    }
    worst = std::max(worst, rhs - evaluate(lower(qc.bound, layout), x));
  }
  for (const auto& lmi : problem.lmis()) {
    RMatrix mat(lmi.dim, lmi.dim);
    for (int r = 0; r < lmi.dim; ++r)
      for (int c = r; c < lmi.dim; ++c)
        mat(r, c) = mat(c, r) = evaluate(lower(lmi.entries[r * lmi.dim + c], layout), x);
    worst = std::max(worst, -min_eigenvalue(mat));
  }
  for (const auto& X : sol.psd) worst = std::max(worst, -hermitian_eigenvalues(X)(0));
  sol.max_violation = worst;
  return sol;
}

// --- eigen helpers --------------------------------------------------------

RVector hermitian_eigenvalues(const CMatrix& X) {
  if (X.rows() != X.cols()) throw ShapeError("eigenvalues need a square matrix");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(X), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

EigPair principal_eigpair(const CMatrix& X) {
  if (X.rows() != X.cols() || X.rows() == 0) throw ShapeError("eigpair needs a nonempty square matrix");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(X));
  const Eigen::Index last = X.rows() - 1;
  EigPair out;
  out.value = es.eigenvalues()(last);
  out.vector = es.eigenvectors().col(last);
  Eigen::Index pivot = 0;
  out.vector.cwiseAbs().maxCoeff(&pivot);
  const Complex p = out.vector(pivot);
  if (std::abs(p) > 0.0) out.vector *= std::conj(p) / std::abs(p);
  out.vector.normalize();
  return out;
}

}  // namespace risnoma::conic
