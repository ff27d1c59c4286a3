#ifndef DIPM_NEWTON_HPP_
#define DIPM_NEWTON_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "dipm/admm_direction.hpp"
#include "dipm/barrier.hpp"
#include "dipm/coupling.hpp"
#include "dipm/error.hpp"
#include "dipm/network.hpp"
#include "dipm/problem.hpp"

namespace dipm {

struct LineSearchParams {
  double armijo = 0.1;   // a in (0, 0.5)
  double shrink = 0.5;   // b in (0, 1)
  Index max_backtracks = 60;
};

struct SolverConfig {
  AdmmConfig admm;
  double eps_nt = 1e-8;
  LineSearchParams line_search;
  Index max_outer = 200;
  bool warm_start = true;
  bool abort_on_inner_failure = true;

  // Barrier schedule.
  double t0 = 1.0;
  double mu = 10.0;
  double eps_p = 1e-6;
  Index max_stages = 100;
  // Use rho * t as the ADMM penalty in stage t (the barrier Hessian grows
  // with t, and ADMM is sensitive to the ratio between the two).
  bool scale_rho_with_t = true;
};

inline void validate(const SolverConfig& cfg) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorKind::kParse, what);
  };
  require(cfg.admm.rho > 0, "rho must be positive");
  require(cfg.admm.eps_pri > 0 && cfg.admm.eps_dual > 0, "ADMM tolerances must be positive");
  require(cfg.admm.max_iterations > 0, "inner iteration cap must be positive");
  require(cfg.eps_nt > 0, "eps_nt must be positive");
  require(cfg.line_search.armijo > 0 && cfg.line_search.armijo < 0.5, "armijo constant must lie in (0, 0.5)");
  require(cfg.line_search.shrink > 0 && cfg.line_search.shrink < 1, "shrink factor must lie in (0, 1)");
  require(cfg.line_search.max_backtracks >= 0, "max_backtracks must be nonnegative");
  require(cfg.max_outer > 0, "outer iteration cap must be positive");
  require(cfg.t0 > 0, "t0 must be positive");
  require(cfg.mu > 1, "mu must exceed 1");
  require(cfg.eps_p > 0, "eps_p must be positive");
  require(cfg.max_stages > 0, "stage cap must be positive");
}

// One row per outer Newton iteration.
struct TraceRow {
  Index stage = 0;
  double t = 1.0;
  Index outer = 0;
  Index inner_iterations = 0;
  double decrement_half = 0.0;  // sum_i (lambda^i)^2 / 2
  double alpha = 0.0;           // 0 on the terminating iteration
  double max_primal_residual = 0.0;
  double max_dual_residual = 0.0;
  double barrier_objective = 0.0;  // sum_i h_i
  double objective = 0.0;          // sum_i f_i
  long messages = 0;
  double consistency_bound = 0.0;  // running sum of alpha^2 eps_pri
};

// (lambda^i)^2 = ds' H ds. Tiny negatives from rounding are clamped.
inline double local_decrement(const Matrix& hessian, const Vector& ds) {
  const double d = ds.dot(hessian * ds);
  if (d < -1e-12) throw Error(ErrorKind::kDomain, "negative Newton decrement " + std::to_string(d));
  return std::max(d, 0.0);
}

struct LineSearchResult {
  std::vector<double> alpha;  // per agent; common within a connected component
  std::vector<double> feasible_alpha;
  Index backtracks = 0;
};

// Each agent backtracks alone until its iterate is strictly inside its
// barrier domain; min-consensus picks the common step. Then the Armijo test
// on sum_i h_i is evaluated with an exact network sum and the common step
// shrinks until it holds.
inline LineSearchResult distributed_line_search(const std::vector<BarrierBlock>& models, const DirectionWorkspace& ws,
                                                const Slices& dS, const LineSearchParams& params, SimNetwork& network,
                                                const std::vector<char>* active = nullptr) {
  const Index N = ws.num_agents();
  auto participates = [&](Index i) { return active == nullptr || (*active)[i] != 0; };
  LineSearchResult out;
  std::vector<double> local(N, 1.0);
  std::vector<Index> shrinks(N, 0);
  for (Index i = 0; i < N; ++i) {
    if (!participates(i)) continue;
    const Vector& s = ws.agents[i].point;
    while (!(models[i].strictly_feasible(s + local[i] * dS[i]) && std::isfinite(models[i].value(s + local[i] * dS[i])))) {
      if (++shrinks[i] > params.max_backtracks) {
        throw Error(ErrorKind::kLineSearch, "agent " + std::to_string(i) + " found no feasible step", static_cast<long>(i));
      }
      local[i] *= params.shrink;
    }
  }
  auto common = network.min_consensus(local, active);
  out.feasible_alpha = common.values;
  out.alpha = common.values;

  // Exponent of the common step, tracked per agent (uniform per component).
  std::vector<Index> exponent(N, 0);
  for (Index i = 0; i < N; ++i) {
    exponent[i] = participates(i) ? static_cast<Index>(std::lround(std::log(out.alpha[i]) / std::log(params.shrink))) : 0;
  }

  std::vector<char> searching = active ? *active : std::vector<char>(N, 1);
  std::vector<double> slack(N, 0.0);
  while (std::find(searching.begin(), searching.end(), 1) != searching.end()) {
    for (Index i = 0; i < N; ++i) {
      if (!searching[i]) continue;
      const AgentLinearization& a = ws.agents[i];
      const double slope = a.gradient.dot(dS[i]);
      const double trial = models[i].value(a.point + out.alpha[i] * dS[i]);
      // Decreases below a few ulps of h_i are not resolvable.
      const double noise = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(a.value);
      slack[i] = trial - a.value - params.armijo * out.alpha[i] * slope - noise;
    }
    auto total = network.sum_consensus(slack, &searching);
    for (Index i = 0; i < N; ++i) {
      if (!searching[i]) continue;
      if (total.at(i) <= 0.0) {
        searching[i] = 0;
        continue;
      }
      if (++exponent[i] > params.max_backtracks) {
        Index worst = i;
        for (Index q = 0; q < N; ++q) {
          if (searching[q] && network.component(q) == network.component(i) && slack[q] > slack[worst]) worst = q;
        }
        throw Error(ErrorKind::kLineSearch, "Armijo condition not met; largest local excess at agent " +
                                                std::to_string(worst), static_cast<long>(worst));
      }
      out.alpha[i] *= params.shrink;
    }
    ++out.backtracks;
  }
  --out.backtracks;
  return out;
}

struct NewtonResult {
  Slices S;
  Index iterations = 0;  // outer iteration index at termination
  double consistency_bound = 0.0;
  std::vector<TraceRow> trace;
  std::vector<Index> inner_iterations;  // per direction computation
  std::vector<double> alphas;           // common step per completed update
  Vector last_direction;
  long factorizations = 0;
  long messages = 0;
};

struct NewtonHooks {
  std::function<void(Index l, const Slices& S)> on_iterate;
  std::function<void(Index l, const DirectionResult&)> on_direction;
  std::function<void(const AdmmIterate&)> admm_observer;
};

// Checks that S is a consistent, locally feasible starting point.
inline void check_start(const LooselyCoupledProblem& problem, const CouplingStructure& cs, const Slices& S,
                        bool inequalities) {
  if (static_cast<Index>(S.size()) != problem.num_agents()) {
    throw Error(ErrorKind::kDimension, "starting point has the wrong number of slices");
  }
  for (Index i = 0; i < problem.num_agents(); ++i) {
    if (S[i].size() != problem.blocks[i].size()) throw Error(ErrorKind::kDimension, "slice length mismatch", i);
  }
  const Slices P = scatter(gather_average(S, cs), cs);
  for (Index i = 0; i < problem.num_agents(); ++i) {
    if ((S[i] - P[i]).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + S[i].cwiseAbs().maxCoeff())) {
      throw Error(ErrorKind::kInfeasibleStart, "starting point is not consistent", i);
    }
    const AgentBlock& b = problem.blocks[i];
    if (b.has_equalities() && (b.eq_A * S[i] - b.eq_b).cwiseAbs().maxCoeff() > 1e-8) {
      throw Error(ErrorKind::kInfeasibleStart,
                  "equality constraints violated at start (residual " +
                      std::to_string((b.eq_A * S[i] - b.eq_b).cwiseAbs().maxCoeff()) + ")", i);
    }
    if (inequalities) {
      Index j = BarrierBlock(b, 1.0).first_violation(S[i]);
      if (j >= 0) {
        throw Error(ErrorKind::kInfeasibleStart,
                    "agent " + std::to_string(i) + " inequality " + std::to_string(j) + " not strictly satisfied", i, j);
      }
    }
  }
}

// Newton's method on sum_i h_i with h_i = t f_i - sum_j log(-g_ij), with
// directions from ADMM, per-agent decrement tests joined by consensus, and
// the distributed line search. `rho` overrides cfg.admm.rho when positive.
inline NewtonResult newton_solve(const LooselyCoupledProblem& problem, double t, Slices S, const SolverConfig& cfg,
                                 SimNetwork& network, Index stage = 0, const NewtonHooks& hooks = {},
                                 double rho = 0.0) {
  const CouplingStructure& cs = network.coupling();
  const Index N = problem.num_agents();
  check_start(problem, cs, S, true);

  std::vector<BarrierBlock> models;
  models.reserve(N);
  for (const auto& b : problem.blocks) models.emplace_back(b, t);

  AdmmConfig admm = cfg.admm;
  if (rho > 0.0) admm.rho = rho;

  NewtonResult res;
  std::vector<char> active(N, 1);
  Vector previous = Vector::Zero(problem.n);
  const long messages_start = network.stats().total();
  if (hooks.on_iterate) hooks.on_iterate(0, S);

  for (Index l = 0;; ++l) {
    if (l >= cfg.max_outer) {
      throw Error(ErrorKind::kIterationCap, "Newton iterations reached the cap of " + std::to_string(cfg.max_outer));
    }
    const long messages_before = network.stats().total();
    DirectionWorkspace ws = linearize(models, S, admm.rho);
    res.factorizations += ws.factorizations;

    DirectionOptions opts;
    if (cfg.warm_start) opts.warm_start = previous;
    opts.participants = active;
    opts.observer = hooks.admm_observer;
    DirectionResult dir = compute_direction(ws, network, admm, opts);
    if (hooks.on_direction) hooks.on_direction(l, dir);
    if (!dir.converged && cfg.abort_on_inner_failure) {
      throw Error(ErrorKind::kInnerNonConvergence,
                  "ADMM did not converge in " + std::to_string(admm.max_iterations) + " iterations");
    }
    res.inner_iterations.push_back(dir.iterations);

    std::vector<char> flags(N, 1);
    double half_sum = 0.0, h_sum = 0.0, f_sum = 0.0;
    for (Index i = 0; i < N; ++i) {
      const double d = local_decrement(ws.agents[i].hessian, dir.dS[i]);
      flags[i] = d / 2.0 <= cfg.eps_nt / static_cast<double>(N);
      half_sum += d / 2.0;
      h_sum += ws.agents[i].value;
      f_sum += problem.blocks[i].objective->value(S[i]);
    }
    auto done = network.all_agree(flags, &active);

    TraceRow row;
    row.stage = stage;
    row.t = t;
    row.outer = l;
    row.inner_iterations = dir.iterations;
    row.decrement_half = half_sum;
    row.max_primal_residual = dir.max_primal_residual;
    row.max_dual_residual = dir.max_dual_residual;
    row.barrier_objective = h_sum;
    row.objective = f_sum;

    bool any_active = false;
    for (Index i = 0; i < N; ++i) {
      if (active[i] && done.at(i)) active[i] = 0;
      any_active = any_active || active[i];
    }
    if (!any_active) {
      row.messages = network.stats().total() - messages_before;
      row.consistency_bound = res.consistency_bound;
      res.trace.push_back(row);
      res.iterations = l;
      res.last_direction = dir.dx;
      break;
    }

    LineSearchResult ls = distributed_line_search(models, ws, dir.dS, cfg.line_search, network, &active);
    std::vector<char> seen(network.num_components(), 0);
    double alpha_min = 1.0;
    for (Index i = 0; i < N; ++i) {
      if (!active[i]) continue;
      S[i] += ls.alpha[i] * dir.dS[i];
      const Index c = network.component(i);
      if (!seen[c]) {
        seen[c] = 1;
        alpha_min = std::min(alpha_min, ls.alpha[i]);
        res.consistency_bound += ls.alpha[i] * ls.alpha[i] * admm.eps_pri;
      }
    }
    res.alphas.push_back(alpha_min);
    row.alpha = alpha_min;
    row.messages = network.stats().total() - messages_before;
    row.consistency_bound = res.consistency_bound;
    res.trace.push_back(row);
    previous = dir.dx;
    if (hooks.on_iterate) hooks.on_iterate(l + 1, S);
  }
  res.S = std::move(S);
  res.messages = network.stats().total() - messages_start;
  return res;
}

}  // namespace dipm

#endif  // DIPM_NEWTON_HPP_
