#ifndef DIPM_PROBLEM_HPP_
#define DIPM_PROBLEM_HPP_

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dipm/error.hpp"
#include "dipm/types.hpp"

namespace dipm {

// Twice-differentiable function on R^k. Implementations must be immutable;
// they are evaluated concurrently by agents.
class SmoothFunction {
 public:
  virtual ~SmoothFunction() = default;

  virtual Index dimension() const = 0;
  virtual double value(const Vector& s) const = 0;
  virtual Vector gradient(const Vector& s) const = 0;
  virtual Matrix hessian(const Vector& s) const = 0;
};

using FunctionPtr = std::shared_ptr<const SmoothFunction>;

// 0.5 s'Ps + q's + r.
class QuadraticFunction final : public SmoothFunction {
 public:
  QuadraticFunction(Matrix P, Vector q, double r) : P_(std::move(P)), q_(std::move(q)), r_(r) {
    if (P_.rows() != P_.cols() || P_.rows() != q_.size()) {
      throw Error(ErrorKind::kDimension, "quadratic: P must be k x k and q of length k");
    }
  }

  Index dimension() const override { return q_.size(); }
  double value(const Vector& s) const override { return 0.5 * s.dot(P_ * s) + q_.dot(s) + r_; }
  Vector gradient(const Vector& s) const override { return P_ * s + q_; }
  Matrix hessian(const Vector&) const override { return P_; }

  const Matrix& P() const { return P_; }
  const Vector& q() const { return q_; }
  double r() const { return r_; }

 private:
  Matrix P_;
  Vector q_;
  double r_;
};

// sum_k log(1 + exp(s_k)) + (w/2) ||s - c||^2. Strictly convex for w > 0.
class SoftplusRidgeFunction final : public SmoothFunction {
 public:
  SoftplusRidgeFunction(double weight, Vector center) : weight_(weight), center_(std::move(center)) {}

  Index dimension() const override { return center_.size(); }

  double value(const Vector& s) const override {
    double acc = 0.0;
    for (Index k = 0; k < s.size(); ++k) acc += softplus(s[k]);
    return acc + 0.5 * weight_ * (s - center_).squaredNorm();
  }

  Vector gradient(const Vector& s) const override {
    Vector g(s.size());
    for (Index k = 0; k < s.size(); ++k) g[k] = logistic(s[k]);
    return g + weight_ * (s - center_);
  }

  Matrix hessian(const Vector& s) const override {
    Matrix H = weight_ * Matrix::Identity(s.size(), s.size());
    for (Index k = 0; k < s.size(); ++k) {
      double p = logistic(s[k]);
      H(k, k) += p * (1.0 - p);
    }
    return H;
  }

  double weight() const { return weight_; }
  const Vector& center() const { return center_; }

 private:
  static double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
  static double logistic(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
  }

  double weight_;
  Vector center_;
};

// Wraps user callbacks. Mostly useful in tests.
class CallbackFunction final : public SmoothFunction {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradientFn = std::function<Vector(const Vector&)>;
  using HessianFn = std::function<Matrix(const Vector&)>;

  CallbackFunction(Index dim, ValueFn value, GradientFn gradient, HessianFn hessian)
      : dim_(dim), value_(std::move(value)), gradient_(std::move(gradient)), hessian_(std::move(hessian)) {}

  Index dimension() const override { return dim_; }
  double value(const Vector& s) const override { return value_(s); }
  Vector gradient(const Vector& s) const override { return gradient_(s); }
  Matrix hessian(const Vector& s) const override { return hessian_(s); }

 private:
  Index dim_;
  ValueFn value_;
  GradientFn gradient_;
  HessianFn hessian_;
};

// One term of a loosely coupled problem. Indices are 0-based in storage.
struct AgentBlock {
  std::vector<Index> index_set;
  FunctionPtr objective;
  std::vector<FunctionPtr> inequalities;  // g_ij(s) <= 0
  Matrix eq_A;                            // p x |J|, p may be 0
  Vector eq_b;

  Index size() const { return static_cast<Index>(index_set.size()); }
  Index num_inequalities() const { return static_cast<Index>(inequalities.size()); }
  Index num_equalities() const { return eq_A.rows(); }
  bool has_equalities() const { return eq_A.rows() > 0; }
};

struct LooselyCoupledProblem {
  Index n = 0;
  std::vector<AgentBlock> blocks;

  Index num_agents() const { return static_cast<Index>(blocks.size()); }

  Index m_total() const {
    Index m = 0;
    for (const auto& b : blocks) m += b.num_inequalities();
    return m;
  }
};

// Checks everything about a block that does not involve other blocks.
inline void validate_block(const AgentBlock& block, Index n, long agent) {
  const Index k = block.size();
  if (k == 0) throw Error(ErrorKind::kStructural, "empty index set", agent);
  for (Index a = 0; a < k; ++a) {
    const Index j = block.index_set[a];
    if (j < 0 || j >= n) {
      throw Error(ErrorKind::kStructural, "index " + std::to_string(j + 1) + " outside 1.." + std::to_string(n),
                  agent, static_cast<long>(j));
    }
    if (a > 0 && block.index_set[a - 1] >= j) {
      throw Error(ErrorKind::kStructural, "index set not strictly increasing", agent, static_cast<long>(j));
    }
  }
  if (!block.objective) throw Error(ErrorKind::kStructural, "missing objective", agent);
  if (block.objective->dimension() != k) {
    throw Error(ErrorKind::kDimension, "objective dimension does not match index set", agent);
  }
  for (std::size_t c = 0; c < block.inequalities.size(); ++c) {
    if (!block.inequalities[c] || block.inequalities[c]->dimension() != k) {
      throw Error(ErrorKind::kDimension, "inequality dimension does not match index set", agent,
                  static_cast<long>(c));
    }
  }
  const Index p = block.eq_A.rows();
  if (p > 0 || block.eq_b.size() > 0) {
    if (block.eq_A.cols() != k || block.eq_b.size() != p) {
      throw Error(ErrorKind::kDimension, "equality system must be p x |J| with b of length p", agent);
    }
    if (p >= k) throw Error(ErrorKind::kStructural, "need fewer equalities than local variables", agent);
    Eigen::FullPivLU<Matrix> lu(block.eq_A);
    if (lu.rank() != p) throw Error(ErrorKind::kStructural, "equality matrix is rank deficient", agent);
  }
}

inline void validate_problem(const LooselyCoupledProblem& problem) {
  if (problem.n < 1) throw Error(ErrorKind::kStructural, "global dimension must be positive");
  if (problem.blocks.empty()) throw Error(ErrorKind::kStructural, "problem has no agents");
  for (Index i = 0; i < problem.num_agents(); ++i) validate_block(problem.blocks[i], problem.n, static_cast<long>(i));
}

// ---------------------------------------------------------------------------
// Declarative block descriptions. These are what problem files and the
// generator produce; make_block turns them into callable blocks.

struct QuadraticObjective {
  Matrix P;
  Vector q;
  double r = 0.0;
};

struct SoftplusRidgeObjective {
  double weight = 1.0;
  Vector center;
};

using ObjectiveSpec = std::variant<QuadraticObjective, SoftplusRidgeObjective>;

// 0.5 s'Qs + a's + c <= 0. An all-zero Q is an affine constraint.
struct QuadraticConstraint {
  Matrix Q;
  Vector a;
  double c = 0.0;

  bool affine() const { return Q.size() == 0 || Q.isZero(0.0); }
};

struct BlockSpec {
  std::vector<Index> index_set;
  ObjectiveSpec objective;
  std::vector<QuadraticConstraint> inequalities;
  Matrix eq_A;
  Vector eq_b;
};

struct ProblemSpec {
  Index n = 0;
  std::vector<BlockSpec> blocks;
};

inline FunctionPtr make_objective(const ObjectiveSpec& spec) {
  if (const auto* quad = std::get_if<QuadraticObjective>(&spec)) {
    return std::make_shared<QuadraticFunction>(quad->P, quad->q, quad->r);
  }
  const auto& sp = std::get<SoftplusRidgeObjective>(spec);
  return std::make_shared<SoftplusRidgeFunction>(sp.weight, sp.center);
}

inline FunctionPtr make_constraint(const QuadraticConstraint& spec) {
  const Index k = spec.a.size();
  Matrix Q = spec.Q.size() == 0 ? Matrix::Zero(k, k) : spec.Q;
  return std::make_shared<QuadraticFunction>(std::move(Q), spec.a, spec.c);
}

inline AgentBlock make_block(const BlockSpec& spec) {
  AgentBlock block;
  block.index_set = spec.index_set;
  block.objective = make_objective(spec.objective);
  for (const auto& g : spec.inequalities) block.inequalities.push_back(make_constraint(g));
  const Index k = static_cast<Index>(spec.index_set.size());
  block.eq_A = spec.eq_A.size() == 0 ? Matrix(0, k) : spec.eq_A;
  block.eq_b = spec.eq_b.size() == 0 ? Vector(0) : spec.eq_b;
  return block;
}

inline LooselyCoupledProblem make_problem(const ProblemSpec& spec) {
  LooselyCoupledProblem problem;
  problem.n = spec.n;
  for (const auto& b : spec.blocks) problem.blocks.push_back(make_block(b));
  validate_problem(problem);
  return problem;
}

}  // namespace dipm

#endif  // DIPM_PROBLEM_HPP_
