#ifndef DIPM_DENSE_LINALG_HPP_
#define DIPM_DENSE_LINALG_HPP_

#include <cmath>
#include <string>
#include <utility>

#include "dipm/error.hpp"
#include "dipm/types.hpp"

namespace dipm {

namespace detail {

inline double inf_norm(const Matrix& M) { return M.size() == 0 ? 0.0 : M.cwiseAbs().rowwise().sum().maxCoeff(); }
inline double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Residual contract shared by both factorizations: normwise backward error,
// where scale bounds |M| |x| for the computed solution.
inline bool residual_ok(const Vector& residual, const Vector& rhs, double scale) {
  return inf_norm(residual) <= 1e-9 * (1.0 + inf_norm(rhs) + scale);
}

}  // namespace detail

// Cholesky factorization M = L L' of a symmetric positive definite matrix.
class SymmetricFactorization {
 public:
  SymmetricFactorization() = default;

  explicit SymmetricFactorization(Matrix M) : M_(std::move(M)) {
    if (M_.rows() != M_.cols()) throw Error(ErrorKind::kDimension, "factor_spd: matrix is not square");
    const Index k = M_.rows();
    norm_ = detail::inf_norm(M_);
    const double tol = 1e-14 * norm_;
    L_ = Matrix::Zero(k, k);
    for (Index c = 0; c < k; ++c) {
      double pivot = M_(c, c) - L_.row(c).head(c).squaredNorm();
      if (!(pivot > tol)) {
        throw Error(ErrorKind::kLinalg,
                    "matrix is not positive definite (pivot " + std::to_string(c) + " = " + std::to_string(pivot) + ")",
                    -1, static_cast<long>(c));
      }
      const double d = std::sqrt(pivot);
      L_(c, c) = d;
      for (Index r = c + 1; r < k; ++r) {
        L_(r, c) = (M_(r, c) - L_.row(r).head(c).dot(L_.row(c).head(c))) / d;
      }
    }
  }

  Index size() const { return M_.rows(); }
  const Matrix& matrix() const { return M_; }

  Vector solve(const Vector& rhs) const {
    if (rhs.size() != size()) throw Error(ErrorKind::kDimension, "solve: rhs length mismatch");
    Vector x = raw_solve(rhs);
    if (detail::residual_ok(M_ * x - rhs, rhs, norm_ * detail::inf_norm(x))) return x;
    x -= raw_solve(M_ * x - rhs);
    if (!detail::residual_ok(M_ * x - rhs, rhs, norm_ * detail::inf_norm(x))) {
      throw Error(ErrorKind::kLinalg, "solve residual above tolerance after refinement");
    }
    return x;
  }

 private:
  Vector raw_solve(const Vector& rhs) const {
    Vector y = L_.triangularView<Eigen::Lower>().solve(rhs);
    return L_.transpose().triangularView<Eigen::Upper>().solve(y);
  }

  Matrix M_;
  Matrix L_;
  double norm_ = 0.0;
};

inline SymmetricFactorization factor_spd(const Matrix& M) { return SymmetricFactorization(M); }

struct KKTSolution {
  Vector primal;      // ds
  Vector multiplier;  // u
};

// Factorization of [[H + rho I, A'], [A, 0]] by Schur complement: the
// leading block K = H + rho I and S = A K^{-1} A' are both Cholesky-factored.
class KKTFactorization {
 public:
  KKTFactorization() = default;

  KKTFactorization(const Matrix& H, double rho, const Matrix& A) {
    if (H.rows() != H.cols()) throw Error(ErrorKind::kDimension, "factor_kkt: H is not square");
    if (!(rho > 0.0)) throw Error(ErrorKind::kLinalg, "factor_kkt: rho must be positive");
    const Index k = H.rows();
    A_ = A.size() == 0 ? Matrix(0, k) : A;
    if (A_.cols() != k) throw Error(ErrorKind::kDimension, "factor_kkt: A has wrong column count");
    leading_ = SymmetricFactorization(H + rho * Matrix::Identity(k, k));
    if (A_.rows() > 0) {
      if (A_.rows() >= k) throw Error(ErrorKind::kLinalg, "factor_kkt: A must have fewer rows than columns");
      KinvAt_.resize(k, A_.rows());
      for (Index c = 0; c < A_.rows(); ++c) KinvAt_.col(c) = leading_.solve(A_.row(c).transpose());
      try {
        schur_ = SymmetricFactorization(A_ * KinvAt_);
      } catch (const Error&) {
        throw Error(ErrorKind::kLinalg, "factor_kkt: equality matrix is rank deficient");
      }
    }
  }

  Index primal_size() const { return leading_.size(); }
  Index multiplier_size() const { return A_.rows(); }

  // Solves with right-hand side (r, w); w defaults to zero.
  KKTSolution solve(const Vector& r, const Vector& w = Vector()) const {
    const Index p = A_.rows();
    Vector w0 = w.size() == 0 ? Vector::Zero(p) : w;
    if (r.size() != primal_size() || w0.size() != p) throw Error(ErrorKind::kDimension, "kkt solve: rhs mismatch");
    KKTSolution sol = raw_solve(r, w0);
    auto residuals = [&](const KKTSolution& s) {
      Vector top = leading_.matrix() * s.primal - r;
      if (p > 0) top += A_.transpose() * s.multiplier;
      Vector bottom = A_ * s.primal - w0;
      return std::pair{top, bottom};
    };
    const double kn = detail::inf_norm(leading_.matrix());
    const double an = detail::inf_norm(A_);
    auto ok = [&](const Vector& top, const Vector& bottom, const KKTSolution& s) {
      const double xs = detail::inf_norm(s.primal);
      const double us = detail::inf_norm(s.multiplier);
      return detail::residual_ok(top, r, kn * xs + an * us) && detail::residual_ok(bottom, w0, an * xs);
    };
    auto [top, bottom] = residuals(sol);
    if (ok(top, bottom, sol)) return sol;
    KKTSolution corr = raw_solve(top, bottom);
    sol.primal -= corr.primal;
    sol.multiplier -= corr.multiplier;
    std::tie(top, bottom) = residuals(sol);
    if (!ok(top, bottom, sol)) {
      throw Error(ErrorKind::kLinalg, "kkt solve residual above tolerance after refinement");
    }
    return sol;
  }

 private:
  KKTSolution raw_solve(const Vector& r, const Vector& w) const {
    KKTSolution sol;
    if (A_.rows() == 0) {
      sol.primal = leading_.solve(r);
      sol.multiplier = Vector(0);
      return sol;
    }
    Vector Kinv_r = leading_.solve(r);
    sol.multiplier = schur_.solve(A_ * Kinv_r - w);
    sol.primal = Kinv_r - KinvAt_ * sol.multiplier;
    return sol;
  }

  Matrix A_;
  SymmetricFactorization leading_;
  Matrix KinvAt_;
  SymmetricFactorization schur_;
};

inline KKTFactorization factor_kkt(const Matrix& H, double rho, const Matrix& A) { return KKTFactorization(H, rho, A); }

}  // namespace dipm

#endif  // DIPM_DENSE_LINALG_HPP_
