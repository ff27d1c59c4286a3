#ifndef DIPM_TESTS_FIXTURES_HPP_
#define DIPM_TESTS_FIXTURES_HPP_

#include <vector>

#include "dipm/dipm.hpp"

namespace dipm::testing {

inline Matrix identity(Index k) { return Matrix::Identity(k, k); }

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index k = 0;
  for (double x : xs) v[k++] = x;
  return v;
}

inline BlockSpec quadratic_block(std::vector<Index> set, Matrix P, Vector q, double r = 0.0) {
  BlockSpec b;
  b.index_set = std::move(set);
  b.objective = QuadraticObjective{std::move(P), std::move(q), r};
  return b;
}

// f1 = 1/2 |s|^2 on {x1, x2}; f2 = 1/2 |s - (1, 1)|^2 on {x2, x3}.
// Minimizer (0, 0.5, 1).
inline ProblemSpec chain_qp_spec() {
  ProblemSpec p;
  p.n = 3;
  p.blocks.push_back(quadratic_block({0, 1}, identity(2), Vector::Zero(2)));
  p.blocks.push_back(quadratic_block({1, 2}, identity(2), vec({-1.0, -1.0}), 1.0));
  return p;
}

// min s subject to 1 - s <= 0; central path s*(t) = 1 + 1/t.
inline ProblemSpec one_dim_spec() {
  ProblemSpec p;
  p.n = 1;
  BlockSpec b = quadratic_block({0}, Matrix::Zero(1, 1), vec({1.0}));
  QuadraticConstraint g;
  g.Q = Matrix::Zero(1, 1);
  g.a = vec({-1.0});
  g.c = 1.0;
  b.inequalities.push_back(g);
  p.blocks.push_back(std::move(b));
  return p;
}

// Two blocks with no shared variables.
inline ProblemSpec decoupled_spec() {
  ProblemSpec p;
  p.n = 4;
  Matrix P1(2, 2);
  P1 << 2.0, 0.5, 0.5, 1.0;
  Matrix P2(2, 2);
  P2 << 3.0, -1.0, -1.0, 2.0;
  p.blocks.push_back(quadratic_block({0, 1}, P1, vec({1.0, -2.0})));
  p.blocks.push_back(quadratic_block({2, 3}, P2, vec({-1.0, 0.5})));
  return p;
}

// Linear path of N agents, agent i owning {i, i+1}.
inline ProblemSpec path_spec(Index agents) {
  ProblemSpec p;
  p.n = agents + 1;
  for (Index i = 0; i < agents; ++i) {
    p.blocks.push_back(quadratic_block({i, i + 1}, identity(2) * (1.0 + 0.1 * static_cast<double>(i)),
                                       vec({static_cast<double>(i % 3) - 1.0, 0.5})));
  }
  return p;
}

inline std::vector<BarrierBlock> barrier_models(const LooselyCoupledProblem& p, double t) {
  std::vector<BarrierBlock> m;
  m.reserve(p.blocks.size());
  for (const auto& b : p.blocks) m.emplace_back(b, t);
  return m;
}

}  // namespace dipm::testing

#endif  // DIPM_TESTS_FIXTURES_HPP_
