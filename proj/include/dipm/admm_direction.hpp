#ifndef DIPM_ADMM_DIRECTION_HPP_
#define DIPM_ADMM_DIRECTION_HPP_

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dipm/barrier.hpp"
#include "dipm/coupling.hpp"
#include "dipm/dense_linalg.hpp"
#include "dipm/error.hpp"
#include "dipm/network.hpp"
#include "dipm/types.hpp"

namespace dipm {

struct AdmmConfig {
  double rho = 1.0;
  double eps_pri = 1e-20;
  double eps_dual = 1e-20;
  Index max_iterations = 5000;
};

// Everything agent i knows about its local model at the current
// linearization point. The factorization of [[H + rho I, A'], [A, 0]] (just
// H + rho I without equalities) is computed once and reused for every ADMM
// iteration of one direction computation.
struct AgentLinearization {
  Vector point;
  double value = 0.0;
  Vector gradient;
  Matrix hessian;
  KKTFactorization factorization;
  bool has_equalities = false;
  Vector eq_residual;  // b - A s; zero at exactly feasible points
};

struct DirectionWorkspace {
  double rho = 1.0;
  std::vector<AgentLinearization> agents;
  long factorizations = 0;

  Index num_agents() const { return static_cast<Index>(agents.size()); }
};

inline DirectionWorkspace linearize(const std::vector<BarrierBlock>& models, const Slices& S, double rho) {
  if (models.size() != S.size()) throw Error(ErrorKind::kDimension, "linearize: model/slice count mismatch");
  DirectionWorkspace ws;
  ws.rho = rho;
  ws.agents.resize(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    AgentLinearization& a = ws.agents[i];
    a.point = S[i];
    LocalCalculus c;
    try {
      c = models[i].calculus(S[i]);
    } catch (const Error& e) {
      throw Error(e.kind(), "agent " + std::to_string(i) + ": " + e.message(), static_cast<long>(i), e.index());
    }
    a.value = c.value;
    a.gradient = std::move(c.gradient);
    a.hessian = std::move(c.hessian);
    a.has_equalities = models[i].block().has_equalities();
    if (a.has_equalities) a.eq_residual = models[i].block().eq_b - models[i].block().eq_A * S[i];
    try {
      a.factorization = factor_kkt(a.hessian, rho, models[i].block().eq_A);
    } catch (const Error& e) {
      throw Error(e.kind(), "agent " + std::to_string(i) + ": " + e.message(), static_cast<long>(i), e.index());
    }
    ++ws.factorizations;
  }
  return ws;
}

// ds = (H + rho I)^{-1} (rho (dz + v) - grad h), using the cached factor.
inline Vector prox_step_unconstrained(const AgentLinearization& agent, const Vector& dz, const Vector& v, double rho) {
  if (agent.has_equalities) throw Error(ErrorKind::kStructural, "agent has equality constraints; use prox_step_equality");
  return agent.factorization.solve(rho * (dz + v) - agent.gradient).primal;
}

// Minimizes the same prox objective over A (s + ds) = b through the KKT
// system. At a feasible point this is A ds = 0; the residual term keeps
// rounding-level drift in A s from accumulating over outer iterations.
inline KKTSolution prox_step_equality(const AgentLinearization& agent, const Vector& dz, const Vector& v, double rho) {
  return agent.factorization.solve(rho * (dz + v) - agent.gradient, agent.eq_residual);
}

inline Vector prox_step(const AgentLinearization& agent, const Vector& dz, const Vector& v, double rho) {
  return agent.has_equalities ? prox_step_equality(agent, dz, v, rho).primal
                              : prox_step_unconstrained(agent, dz, v, rho);
}

struct DirectionResult {
  Vector dx;        // global Newton direction (dz at termination)
  Slices dS;        // E dx, one slice per agent
  Index iterations = 0;
  double max_primal_residual = 0.0;  // max_i ||ds^i - dz_{J_i}||^2
  double max_dual_residual = 0.0;    // max_i ||dz^{k+1}_{J_i} - dz^k_{J_i}||^2
  bool converged = false;
  long messages = 0;
  long factorizations = 0;
};

// Read-only view of one ADMM iteration, for diagnostics.
struct AdmmIterate {
  Index k;
  const Slices& ds;
  const Slices& dz;
  const Slices& v;
};

struct DirectionOptions {
  std::optional<Vector> warm_start;   // dz^(0); zero when absent
  std::optional<Slices> initial_dual; // v^(0); zero when absent
  std::optional<std::vector<char>> participants;  // agents taking part; all when absent
  std::function<void(const AdmmIterate&)> observer;
};

// ADMM on the direction subproblem: local prox steps, neighbor averaging of
// shared components, dual update, and a network-wide AND of the local
// stopping tests. Components of a disconnected graph stop independently.
inline DirectionResult compute_direction(const DirectionWorkspace& ws, SimNetwork& network, const AdmmConfig& cfg,
                                         const DirectionOptions& opts = {}) {
  const CouplingStructure& cs = network.coupling();
  const Index N = cs.num_agents();
  if (ws.num_agents() != N) throw Error(ErrorKind::kDimension, "compute_direction: workspace size mismatch");
  const long messages_before = network.stats().total();

  Slices dz = opts.warm_start ? scatter(*opts.warm_start, cs) : Slices(N);
  Slices v = opts.initial_dual ? *opts.initial_dual : Slices(N);
  Slices ds(N);
  for (Index i = 0; i < N; ++i) {
    if (!opts.warm_start) dz[i] = Vector::Zero(cs.block_size(i));
    if (!opts.initial_dual) v[i] = Vector::Zero(cs.block_size(i));
    ds[i] = Vector::Zero(cs.block_size(i));
  }

  std::vector<char> active = opts.participants ? *opts.participants : std::vector<char>(N, 1);
  std::vector<double> primal(N, 0.0), dual(N, 0.0);
  const double pri_tol = cfg.eps_pri / static_cast<double>(N);
  const double dual_tol = cfg.eps_dual / static_cast<double>(N);
  DirectionResult result;

  for (Index k = 0; k < cfg.max_iterations && std::find(active.begin(), active.end(), 1) != active.end(); ++k) {
    for (Index i = 0; i < N; ++i) {
      if (active[i]) ds[i] = prox_step(ws.agents[i], dz[i], v[i], ws.rho);
    }
    Slices dz_next = network.exchange_shared_components(ds, &active);
    std::vector<char> flags(N, 1);
    for (Index i = 0; i < N; ++i) {
      if (!active[i]) continue;
      v[i] += dz_next[i] - ds[i];
      primal[i] = (ds[i] - dz_next[i]).squaredNorm();
      dual[i] = (dz_next[i] - dz[i]).squaredNorm();
      flags[i] = primal[i] <= pri_tol && dual[i] <= dual_tol;
      dz[i] = std::move(dz_next[i]);
    }
    result.iterations = k + 1;
    if (opts.observer) opts.observer(AdmmIterate{k, ds, dz, v});

    auto agreed = network.all_agree(flags, &active);
    bool any_active = false;
    for (Index i = 0; i < N; ++i) {
      if (active[i] && agreed.at(i)) active[i] = 0;
      any_active = any_active || active[i];
    }
    if (!any_active) break;
  }
  result.converged = std::none_of(active.begin(), active.end(), [](char a) { return a != 0; });

  result.dx.resize(cs.n);
  for (Index j = 0; j < cs.n; ++j) result.dx[j] = dz[cs.owners[j][0]][cs.owner_positions[j][0]];
  result.dS = scatter(result.dx, cs);
  result.max_primal_residual = *std::max_element(primal.begin(), primal.end());
  result.max_dual_residual = *std::max_element(dual.begin(), dual.end());
  result.messages = network.stats().total() - messages_before;
  result.factorizations = ws.factorizations;
  return result;
}

}  // namespace dipm

#endif  // DIPM_ADMM_DIRECTION_HPP_
