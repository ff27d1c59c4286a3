#ifndef DIPM_ORACLE_HPP_
#define DIPM_ORACLE_HPP_

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dipm/barrier.hpp"
#include "dipm/coupling.hpp"
#include "dipm/error.hpp"
#include "dipm/newton.hpp"
#include "dipm/problem.hpp"

// Centralized dense reference solvers. Everything here is O(n^3) and only
// meant for checking the distributed code.
namespace dipm::oracle {

// F(x) = sum_i F_i(x) = sum_i f_i(E_{J_i} x), assembled through the index sets.
class DenseProblem {
 public:
  explicit DenseProblem(const LooselyCoupledProblem& problem) : problem_(&problem) {
    validate_problem(problem);
    std::vector<Vector> rows;
    std::vector<double> rhs;
    for (const auto& b : problem.blocks) {
      for (Index r = 0; r < b.num_equalities(); ++r) {
        Vector row = Vector::Zero(problem.n);
        for (Index k = 0; k < b.size(); ++k) row[b.index_set[k]] = b.eq_A(r, k);
        rows.push_back(std::move(row));
        rhs.push_back(b.eq_b[r]);
      }
    }
    // Agents may impose the same constraint on shared variables; keep a
    // linearly independent subset of the stacked rows.
    std::vector<Vector> basis;
    std::vector<Index> keep;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      Vector w = rows[r];
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& q : basis) w -= q.dot(w) * q;
      }
      if (w.norm() > 1e-10 * rows[r].norm()) {
        basis.push_back(w.normalized());
        keep.push_back(static_cast<Index>(r));
      }
    }
    A_.resize(static_cast<Index>(keep.size()), problem.n);
    b_.resize(static_cast<Index>(keep.size()));
    for (std::size_t r = 0; r < keep.size(); ++r) {
      A_.row(static_cast<Index>(r)) = rows[keep[r]].transpose();
      b_[static_cast<Index>(r)] = rhs[keep[r]];
    }
  }

  const LooselyCoupledProblem& problem() const { return *problem_; }
  Index n() const { return problem_->n; }
  Index m_total() const { return problem_->m_total(); }
  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }

  Vector local(const Vector& x, Index i) const {
    const auto& set = problem_->blocks[i].index_set;
    Vector s(static_cast<Index>(set.size()));
    for (std::size_t k = 0; k < set.size(); ++k) s[static_cast<Index>(k)] = x[set[k]];
    return s;
  }

  double objective(const Vector& x) const {
    double acc = 0.0;
    for (Index i = 0; i < problem_->num_agents(); ++i) acc += problem_->blocks[i].objective->value(local(x, i));
    return acc;
  }

  bool strictly_feasible(const Vector& x) const {
    for (Index i = 0; i < problem_->num_agents(); ++i) {
      if (!BarrierBlock(problem_->blocks[i], 1.0).strictly_feasible(local(x, i))) return false;
    }
    return true;
  }

  double max_inequality(const Vector& x) const {
    double worst = -std::numeric_limits<double>::infinity();
    for (Index i = 0; i < problem_->num_agents(); ++i) {
      for (const auto& g : problem_->blocks[i].inequalities) worst = std::max(worst, g->value(local(x, i)));
    }
    return worst;
  }

  double equality_violation(const Vector& x) const {
    return A_.rows() == 0 ? 0.0 : (A_ * x - b_).cwiseAbs().maxCoeff();
  }

  // t F(x) - sum log(-g); +inf outside the domain.
  double barrier_value(const Vector& x, double t) const {
    double acc = 0.0;
    for (Index i = 0; i < problem_->num_agents(); ++i) {
      const double v = BarrierBlock(problem_->blocks[i], t).value(local(x, i));
      if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
      acc += v;
    }
    return acc;
  }

  // Gradient and Hessian of the barrier objective, scattered into R^n.
  void barrier_derivatives(const Vector& x, double t, Vector& g, Matrix& H) const {
    g = Vector::Zero(n());
    H = Matrix::Zero(n(), n());
    for (Index i = 0; i < problem_->num_agents(); ++i) {
      const auto& set = problem_->blocks[i].index_set;
      LocalCalculus c = barrier_calculus(problem_->blocks[i], t, local(x, i));
      for (std::size_t a = 0; a < set.size(); ++a) {
        g[set[a]] += c.gradient[static_cast<Index>(a)];
        for (std::size_t b = 0; b < set.size(); ++b) H(set[a], set[b]) += c.hessian(static_cast<Index>(a), static_cast<Index>(b));
      }
    }
  }

 private:
  const LooselyCoupledProblem* problem_;
  Matrix A_;
  Vector b_;
};

struct OracleConfig {
  double eps_nt = 1e-10;
  LineSearchParams line_search;
  Index max_iterations = 200;
};

struct OracleResult {
  Vector x;
  Index iterations = 0;
  double max_direction_equality_residual = 0.0;  // max_l ||A dx||_inf
  double decrement_half = 0.0;
};

// Solves [[H, A'], [A, 0]] [dx; w] = [-g; 0]. Uses the Schur complement
// when H is positive definite (barrier Hessians get badly scaled as t grows)
// and a full-pivoting LU of the whole saddle matrix otherwise.
inline Vector kkt_direction(const Matrix& H, const Vector& g, const Matrix& A) {
  const Index n = H.rows(), p = A.rows();
  Eigen::LLT<Matrix> llt(H);
  if (llt.info() == Eigen::Success) {
    Vector dx = llt.solve(-g);
    if (p > 0) {
      Matrix HinvAt = llt.solve(A.transpose());
      Eigen::LLT<Matrix> schur(A * HinvAt);
      if (schur.info() != Eigen::Success) throw Error(ErrorKind::kLinalg, "equality system is rank deficient");
      dx -= HinvAt * schur.solve(A * dx);
    }
    if (!dx.allFinite()) throw Error(ErrorKind::kLinalg, "reduced Hessian is singular");
    return dx;
  }
  if (p == 0) throw Error(ErrorKind::kLinalg, "reduced Hessian is not positive definite");
  Matrix K = Matrix::Zero(n + p, n + p);
  K.topLeftCorner(n, n) = H;
  K.topRightCorner(n, p) = A.transpose();
  K.bottomLeftCorner(p, n) = A;
  Vector rhs = Vector::Zero(n + p);
  rhs.head(n) = -g;
  Eigen::FullPivLU<Matrix> lu(K);
  if (!lu.isInvertible()) throw Error(ErrorKind::kLinalg, "KKT system is singular");
  return lu.solve(rhs).head(n);
}

// Newton's method on t F(x) + barrier subject to A x = b, started from a
// feasible x0, stopping at lambda^2 / 2 <= eps_nt.
inline OracleResult centralized_newton(const DenseProblem& dp, Vector x0, const OracleConfig& cfg = {}, double t = 1.0) {
  if (dp.equality_violation(x0) > 1e-9) throw Error(ErrorKind::kInfeasibleStart, "oracle start violates A x = b");
  if (!dp.strictly_feasible(x0)) throw Error(ErrorKind::kInfeasibleStart, "oracle start is not strictly feasible");
  OracleResult res;
  res.x = std::move(x0);
  for (Index l = 0;; ++l) {
    if (l >= cfg.max_iterations) throw Error(ErrorKind::kIterationCap, "oracle Newton iteration cap reached");
    Vector g;
    Matrix H;
    dp.barrier_derivatives(res.x, t, g, H);
    Vector dx = kkt_direction(H, g, dp.A());
    if (dp.A().rows() > 0) {
      res.max_direction_equality_residual =
          std::max(res.max_direction_equality_residual, (dp.A() * dx).cwiseAbs().maxCoeff());
    }
    const double lambda2 = std::max(0.0, dx.dot(H * dx));
    res.decrement_half = lambda2 / 2.0;
    if (lambda2 / 2.0 <= cfg.eps_nt) {
      res.iterations = l;
      return res;
    }
    const double f0 = dp.barrier_value(res.x, t);
    const double slope = g.dot(dx);
    double alpha = 1.0;
    Index k = 0;
    for (;; ++k) {
      const double f1 = dp.barrier_value(res.x + alpha * dx, t);
      if (std::isfinite(f1) &&
          f1 <= f0 + cfg.line_search.armijo * alpha * slope + 64.0 * std::numeric_limits<double>::epsilon() * std::abs(f0)) {
        break;
      }
      if (k >= cfg.line_search.max_backtracks) throw Error(ErrorKind::kLineSearch, "oracle line search failed");
      alpha *= cfg.line_search.shrink;
    }
    res.x += alpha * dx;
  }
}

// Same problem in the lifted (S, x) variables with constraints -S + E x = 0
// and A^i s^i = b^i. Used to cross-check the reduced formulation.
inline OracleResult centralized_newton_lifted(const DenseProblem& dp, const Vector& x0, const OracleConfig& cfg = {},
                                              double t = 1.0) {
  const LooselyCoupledProblem& problem = dp.problem();
  const Index N = problem.num_agents();
  std::vector<Index> offset(N + 1, 0);
  for (Index i = 0; i < N; ++i) offset[i + 1] = offset[i] + problem.blocks[i].size();
  const Index ns = offset[N], n = problem.n, dim = ns + n;
  Index p_local = 0;
  for (const auto& b : problem.blocks) p_local += b.num_equalities();
  const Index p = ns + p_local;

  Matrix A = Matrix::Zero(p, dim);
  for (Index i = 0; i < N; ++i) {
    const auto& b = problem.blocks[i];
    for (Index k = 0; k < b.size(); ++k) {
      A(offset[i] + k, offset[i] + k) = -1.0;
      A(offset[i] + k, ns + b.index_set[k]) = 1.0;
    }
  }
  Index row = ns;
  for (Index i = 0; i < N; ++i) {
    const auto& b = problem.blocks[i];
    for (Index r = 0; r < b.num_equalities(); ++r, ++row) A.block(row, offset[i], 1, b.size()) = b.eq_A.row(r);
  }

  Vector z(dim);
  for (Index i = 0; i < N; ++i) z.segment(offset[i], problem.blocks[i].size()) = dp.local(x0, i);
  z.tail(n) = x0;
  auto slice = [&](const Vector& v, Index i) { return Vector(v.segment(offset[i], problem.blocks[i].size())); };
  auto value = [&](const Vector& v) {
    double acc = 0.0;
    for (Index i = 0; i < N; ++i) {
      const double hv = BarrierBlock(problem.blocks[i], t).value(slice(v, i));
      if (!std::isfinite(hv)) return std::numeric_limits<double>::infinity();
      acc += hv;
    }
    return acc;
  };

  OracleResult res;
  for (Index l = 0;; ++l) {
    if (l >= cfg.max_iterations) throw Error(ErrorKind::kIterationCap, "lifted oracle iteration cap reached");
    Vector g = Vector::Zero(dim);
    Matrix H = Matrix::Zero(dim, dim);
    for (Index i = 0; i < N; ++i) {
      LocalCalculus c = barrier_calculus(problem.blocks[i], t, slice(z, i));
      const Index k = problem.blocks[i].size();
      g.segment(offset[i], k) = c.gradient;
      H.block(offset[i], offset[i], k, k) = c.hessian;
    }
    Vector dz = kkt_direction(H, g, A);
    const double lambda2 = std::max(0.0, dz.dot(H * dz));
    if (lambda2 / 2.0 <= cfg.eps_nt) {
      res.iterations = l;
      res.decrement_half = lambda2 / 2.0;
      break;
    }
    const double f0 = value(z), slope = g.dot(dz);
    double alpha = 1.0;
    for (Index k = 0;; ++k) {
      const double f1 = value(z + alpha * dz);
      if (std::isfinite(f1) &&
          f1 <= f0 + cfg.line_search.armijo * alpha * slope + 64.0 * std::numeric_limits<double>::epsilon() * std::abs(f0)) {
        break;
      }
      if (k >= cfg.line_search.max_backtracks) throw Error(ErrorKind::kLineSearch, "lifted oracle line search failed");
      alpha *= cfg.line_search.shrink;
    }
    z += alpha * dz;
  }
  res.x = z.tail(n);
  return res;
}

struct OracleIpmResult {
  Vector x;
  Index stages = 0;
  double t_final = 0.0;
  std::vector<Vector> central_path;
};

inline OracleIpmResult centralized_ipm(const DenseProblem& dp, Vector x0, double t0, double mu, double eps_p,
                                       const OracleConfig& cfg = {}, Index max_stages = 100) {
  if (!dp.strictly_feasible(x0)) throw Error(ErrorKind::kInfeasibleStart, "oracle start is not strictly feasible");
  const double m = static_cast<double>(dp.m_total());
  OracleIpmResult res;
  res.x = std::move(x0);
  for (Index q = 0;; ++q) {
    if (q >= max_stages) throw Error(ErrorKind::kIterationCap, "oracle barrier stage cap reached");
    const double t = t0 * std::pow(mu, static_cast<double>(q));
    res.x = centralized_newton(dp, res.x, cfg, t).x;
    res.central_path.push_back(res.x);
    res.stages = q + 1;
    res.t_final = t;
    if (m / t < eps_p) break;
  }
  return res;
}

struct DirectDirection {
  Slices dS;
  Vector dx;
};

// Newton direction of sum_i h_i at the consistent point S, obtained by
// eliminating dS = E dx: sum E' hess h_i E dx = -sum E' grad h_i (subject to
// the stacked local equalities A^i dS^i = 0 when present).
inline DirectDirection direct_direction(const LooselyCoupledProblem& problem, const Slices& S, double t = 1.0) {
  CouplingStructure cs = build_coupling(problem);
  DenseProblem dp(problem);
  const Vector x = gather_average(S, cs);
  Vector g;
  Matrix H;
  dp.barrier_derivatives(x, t, g, H);
  DirectDirection out;
  out.dx = kkt_direction(H, g, dp.A());
  out.dS = scatter(out.dx, cs);
  return out;
}

}  // namespace dipm::oracle

#endif  // DIPM_ORACLE_HPP_
