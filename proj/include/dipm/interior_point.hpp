#ifndef DIPM_INTERIOR_POINT_HPP_
#define DIPM_INTERIOR_POINT_HPP_

#include <cmath>
#include <string>
#include <vector>

#include "dipm/newton.hpp"

namespace dipm {

struct StageRow {
  Index stage = 0;
  double t = 0.0;
  Index newton_iterations = 0;
  Index admm_iterations = 0;
  double gap_bound = 0.0;  // m_total / t
  double objective = 0.0;
};

struct IpmResult {
  Slices S;
  Index stages = 0;
  double t_final = 0.0;
  double consistency_bound = 0.0;
  std::vector<TraceRow> trace;
  std::vector<StageRow> stage_trace;
  std::vector<Slices> central_path;  // S*(t^(q)) per stage
  long factorizations = 0;
  long messages = 0;
};

// t^(q) = t0 mu^q.
inline double barrier_parameter(const SolverConfig& cfg, Index q) { return cfg.t0 * std::pow(cfg.mu, static_cast<double>(q)); }

inline double objective_sum(const LooselyCoupledProblem& problem, const Slices& S) {
  double acc = 0.0;
  for (Index i = 0; i < problem.num_agents(); ++i) acc += problem.blocks[i].objective->value(S[i]);
  return acc;
}

// Barrier outer loop: solve each stage with the distributed Newton method,
// warm-started from the previous stage, until m_total / t < eps_p.
inline IpmResult ipm_solve(const LooselyCoupledProblem& problem, Slices S0, const SolverConfig& cfg, SimNetwork& network,
                           const NewtonHooks& hooks = {}) {
  validate(cfg);
  check_start(problem, network.coupling(), S0, true);
  const double m = static_cast<double>(problem.m_total());

  IpmResult res;
  res.S = std::move(S0);
  const long messages_start = network.stats().total();
  for (Index q = 0;; ++q) {
    if (q >= cfg.max_stages) {
      throw Error(ErrorKind::kIterationCap, "barrier stages reached the cap of " + std::to_string(cfg.max_stages));
    }
    const double t = barrier_parameter(cfg, q);
    const double rho = cfg.scale_rho_with_t ? cfg.admm.rho * t : cfg.admm.rho;
    NewtonResult stage = newton_solve(problem, t, std::move(res.S), cfg, network, q, hooks, rho);
    res.S = std::move(stage.S);
    res.consistency_bound += stage.consistency_bound;
    res.factorizations += stage.factorizations;
    res.trace.insert(res.trace.end(), stage.trace.begin(), stage.trace.end());
    res.central_path.push_back(res.S);

    StageRow row;
    row.stage = q;
    row.t = t;
    row.newton_iterations = stage.iterations;
    for (Index k : stage.inner_iterations) row.admm_iterations += k;
    row.gap_bound = m / t;
    row.objective = objective_sum(problem, res.S);
    res.stage_trace.push_back(row);

    res.stages = q + 1;
    res.t_final = t;
    if (m / t < cfg.eps_p) break;
  }
  res.messages = network.stats().total() - messages_start;
  return res;
}

}  // namespace dipm

#endif  // DIPM_INTERIOR_POINT_HPP_
