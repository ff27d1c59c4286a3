#ifndef DIPM_COUPLING_HPP_
#define DIPM_COUPLING_HPP_

#include <algorithm>
#include <string>
#include <vector>

#include "dipm/error.hpp"
#include "dipm/problem.hpp"
#include "dipm/types.hpp"

namespace dipm {

// Who holds which variable. owners[j] lists the agents whose index set
// contains j in ascending order, and owner_positions[j][r] is the local
// coordinate of j inside agent owners[j][r]. degree[j] = |owners[j]| is the
// diagonal of E'E.
struct CouplingStructure {
  Index n = 0;
  std::vector<std::vector<Index>> index_sets;
  std::vector<std::vector<Index>> owners;
  std::vector<std::vector<Index>> owner_positions;
  std::vector<Index> degree;
  std::vector<std::vector<Index>> neighbors;  // excludes the agent itself

  Index num_agents() const { return static_cast<Index>(index_sets.size()); }
  Index block_size(Index agent) const { return static_cast<Index>(index_sets[agent].size()); }
  Index max_degree() const { return degree.empty() ? 0 : *std::max_element(degree.begin(), degree.end()); }

  // Local coordinate of global variable j in agent i, or -1.
  Index local_position(Index agent, Index j) const {
    const auto& set = index_sets[agent];
    auto it = std::lower_bound(set.begin(), set.end(), j);
    return (it != set.end() && *it == j) ? static_cast<Index>(it - set.begin()) : -1;
  }

  bool are_neighbors(Index a, Index b) const {
    const auto& ne = neighbors[a];
    return std::binary_search(ne.begin(), ne.end(), b);
  }
};

inline CouplingStructure build_coupling(const LooselyCoupledProblem& problem) {
  validate_problem(problem);
  CouplingStructure cs;
  cs.n = problem.n;
  const Index N = problem.num_agents();
  cs.index_sets.resize(N);
  cs.owners.assign(problem.n, {});
  cs.owner_positions.assign(problem.n, {});
  for (Index i = 0; i < N; ++i) {
    cs.index_sets[i] = problem.blocks[i].index_set;
    for (Index k = 0; k < problem.blocks[i].size(); ++k) {
      const Index j = problem.blocks[i].index_set[k];
      cs.owners[j].push_back(i);
      cs.owner_positions[j].push_back(k);
    }
  }
  cs.degree.resize(problem.n);
  for (Index j = 0; j < problem.n; ++j) {
    if (cs.owners[j].empty()) {
      throw Error(ErrorKind::kStructural, "variable " + std::to_string(j + 1) + " is not covered by any agent", -1,
                  static_cast<long>(j));
    }
    cs.degree[j] = static_cast<Index>(cs.owners[j].size());
  }
  cs.neighbors.assign(N, {});
  for (Index j = 0; j < problem.n; ++j) {
    for (Index a : cs.owners[j]) {
      for (Index b : cs.owners[j]) {
        if (a != b) cs.neighbors[a].push_back(b);
      }
    }
  }
  for (auto& ne : cs.neighbors) {
    std::sort(ne.begin(), ne.end());
    ne.erase(std::unique(ne.begin(), ne.end()), ne.end());
  }
  return cs;
}

// s^i = x_{J_i}.
inline Slices scatter(const Vector& x, const CouplingStructure& cs) {
  if (x.size() != cs.n) throw Error(ErrorKind::kDimension, "scatter: vector length does not match n");
  Slices out(cs.num_agents());
  for (Index i = 0; i < cs.num_agents(); ++i) {
    const auto& set = cs.index_sets[i];
    out[i].resize(static_cast<Index>(set.size()));
    for (std::size_t k = 0; k < set.size(); ++k) out[i][static_cast<Index>(k)] = x[set[k]];
  }
  return out;
}

// z = (E'E)^{-1} E' S. Each component is the first owner's copy plus the
// mean deviation of all copies from it, summed in ascending agent order: the
// result is bit-reproducible and returns consistent input unchanged.
inline Vector gather_average(const Slices& S, const CouplingStructure& cs) {
  if (static_cast<Index>(S.size()) != cs.num_agents()) {
    throw Error(ErrorKind::kDimension, "gather_average: wrong number of slices");
  }
  for (Index i = 0; i < cs.num_agents(); ++i) {
    if (S[i].size() != cs.block_size(i)) {
      throw Error(ErrorKind::kDimension, "gather_average: slice length does not match index set", i);
    }
  }
  Vector z(cs.n);
  for (Index j = 0; j < cs.n; ++j) {
    const double base = S[cs.owners[j][0]][cs.owner_positions[j][0]];
    double acc = 0.0;
    for (std::size_t r = 1; r < cs.owners[j].size(); ++r) acc += S[cs.owners[j][r]][cs.owner_positions[j][r]] - base;
    z[j] = base + acc / static_cast<double>(cs.degree[j]);
  }
  return z;
}

// ||S - E (E'E)^{-1} E' S||^2.
inline double consistency_error(const Slices& S, const CouplingStructure& cs) {
  Slices P = scatter(gather_average(S, cs), cs);
  double acc = 0.0;
  for (std::size_t i = 0; i < S.size(); ++i) acc += (S[i] - P[i]).squaredNorm();
  return acc;
}

}  // namespace dipm

#endif  // DIPM_COUPLING_HPP_
