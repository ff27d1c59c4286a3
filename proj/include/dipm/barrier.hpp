#ifndef DIPM_BARRIER_HPP_
#define DIPM_BARRIER_HPP_

#include <cmath>
#include <limits>
#include <string>

#include "dipm/error.hpp"
#include "dipm/problem.hpp"

namespace dipm {

struct LocalCalculus {
  double value = 0.0;
  Vector gradient;
  Matrix hessian;
};

// h(s) = t f(s) - sum_j log(-g_j(s)) for one agent block. With no
// inequalities and t = 1 this is just the block objective, so the Newton
// driver uses it for both the unconstrained and the barrier stages.
class BarrierBlock final : public SmoothFunction {
 public:
  BarrierBlock(const AgentBlock& block, double t) : block_(&block), t_(t) {
    if (!(t > 0.0)) throw Error(ErrorKind::kDomain, "barrier parameter t must be positive");
  }

  const AgentBlock& block() const { return *block_; }
  double t() const { return t_; }

  Index dimension() const override { return block_->size(); }

  // Index of the first constraint with g_j(s) >= 0 (or non-finite), or -1.
  Index first_violation(const Vector& s) const {
    for (Index j = 0; j < block_->num_inequalities(); ++j) {
      const double g = block_->inequalities[j]->value(s);
      if (!(g < 0.0)) return j;
    }
    return -1;
  }

  bool strictly_feasible(const Vector& s) const { return first_violation(s) < 0; }

  // +inf outside the domain, so it can be used directly in line searches.
  double value(const Vector& s) const override {
    double acc = t_ * block_->objective->value(s);
    for (const auto& g : block_->inequalities) {
      const double gv = g->value(s);
      if (!(gv < 0.0)) return std::numeric_limits<double>::infinity();
      acc -= std::log(-gv);
    }
    return acc;
  }

  Vector gradient(const Vector& s) const override { return calculus(s).gradient; }
  Matrix hessian(const Vector& s) const override { return calculus(s).hessian; }

  // grad h = t grad f + sum_j (-1/g_j) grad g_j
  // hess h = t hess f + sum_j [ grad g_j grad g_j' / g_j^2 - hess g_j / g_j ]
  LocalCalculus calculus(const Vector& s) const {
    LocalCalculus out;
    out.value = t_ * block_->objective->value(s);
    out.gradient = t_ * block_->objective->gradient(s);
    out.hessian = t_ * block_->objective->hessian(s);
    for (Index j = 0; j < block_->num_inequalities(); ++j) {
      const SmoothFunction& g = *block_->inequalities[j];
      const double gv = g.value(s);
      if (!(gv < 0.0)) {
        throw Error(ErrorKind::kDomain, "inequality " + std::to_string(j) + " not strictly satisfied", -1,
                    static_cast<long>(j));
      }
      const Vector dg = g.gradient(s);
      out.value -= std::log(-gv);
      out.gradient -= dg / gv;
      out.hessian += dg * dg.transpose() / (gv * gv) - g.hessian(s) / gv;
    }
    return out;
  }

  // Contribution of constraint j alone to the barrier Hessian.
  Matrix barrier_hessian_term(Index j, const Vector& s) const {
    const SmoothFunction& g = *block_->inequalities[j];
    const double gv = g.value(s);
    if (!(gv < 0.0)) throw Error(ErrorKind::kDomain, "inequality not strictly satisfied", -1, static_cast<long>(j));
    const Vector dg = g.gradient(s);
    return dg * dg.transpose() / (gv * gv) - g.hessian(s) / gv;
  }

 private:
  const AgentBlock* block_;
  double t_;
};

inline LocalCalculus barrier_calculus(const AgentBlock& block, double t, const Vector& point) {
  return BarrierBlock(block, t).calculus(point);
}

}  // namespace dipm

#endif  // DIPM_BARRIER_HPP_
