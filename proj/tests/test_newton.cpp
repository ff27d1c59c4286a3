#include <gtest/gtest.h>

#include "fixtures.hpp"

namespace dipm {
namespace {

using testing::vec;

TEST(LocalDecrement, Examples) {
  Matrix H(2, 2);
  H << 2, 1, 1, 3;
  EXPECT_EQ(local_decrement(H, Vector::Zero(2)), 0.0);
  EXPECT_DOUBLE_EQ(local_decrement(Matrix::Identity(2, 2), vec({3, 4})), 25.0);
  EXPECT_EQ(local_decrement(-1e-14 * Matrix::Identity(1, 1), vec({1})), 0.0);
  EXPECT_THROW(local_decrement(-Matrix::Identity(1, 1), vec({1})), Error);
}

TEST(LocalDecrement, ChainQpSumsToOneAndAHalf) {
  auto p = make_problem(testing::chain_qp_spec());
  auto cs = build_coupling(p);
  auto models = testing::barrier_models(p, 1.0);
  auto ws = linearize(models, scatter(Vector::Zero(3), cs), 1.0);
  const Slices dS = scatter(vec({0, 0.5, 1}), cs);
  double sum = 0.0;
  for (Index i = 0; i < 2; ++i) sum += local_decrement(ws.agents[i].hessian, dS[i]);
  EXPECT_NEAR(sum, 1.5, 1e-15);
}

TEST(LineSearch, QuadraticFullStep) {
  auto p = make_problem(testing::chain_qp_spec());
  auto cs = build_coupling(p);
  SimNetwork net(cs);
  auto models = testing::barrier_models(p, 1.0);
  auto ws = linearize(models, scatter(Vector::Zero(3), cs), 1.0);
  auto ls = distributed_line_search(models, ws, scatter(vec({0, 0.5, 1}), cs), LineSearchParams{}, net);
  EXPECT_EQ(ls.alpha, (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(ls.backtracks, 0);
}

TEST(LineSearch, ZeroDirectionAcceptsUnitStep) {
  auto p = make_problem(testing::chain_qp_spec());
  auto cs = build_coupling(p);
  SimNetwork net(cs);
  auto models = testing::barrier_models(p, 1.0);
  auto ws = linearize(models, scatter(vec({0.2, 0.1, 0.4}), cs), 1.0);
  auto ls = distributed_line_search(models, ws, scatter(Vector::Zero(3), cs), LineSearchParams{}, net);
  EXPECT_EQ(ls.alpha, (std::vector<double>{1.0, 1.0}));
}

TEST(LineSearch, AgentNearItsBarrierSetsTheStep) {
  ProblemSpec spec = testing::chain_qp_spec();
  spec.blocks[0].inequalities.push_back(QuadraticConstraint{Matrix::Zero(2, 2), vec({-1, 0}), 1.0});  // x1 >= 1
  auto p = make_problem(spec);
  auto cs = build_coupling(p);
  SimNetwork net(cs);
  auto models = testing::barrier_models(p, 1.0);
  auto ws = linearize(models, scatter(vec({1.1, 0, 0}), cs), 1.0);
  // x1 + alpha (-0.4) > 1 needs alpha < 0.25.
  auto ls = distributed_line_search(models, ws, scatter(vec({-0.4, 0, 0}), cs), LineSearchParams{}, net);
  EXPECT_EQ(ls.feasible_alpha, (std::vector<double>{0.125, 0.125}));
  EXPECT_LE(ls.alpha[0], 0.125);
  EXPECT_EQ(ls.alpha[0], ls.alpha[1]);
}

TEST(LineSearch, ExhaustedBacktracksNameTheAgent) {
  ProblemSpec spec = testing::chain_qp_spec();
  spec.blocks[1].inequalities.push_back(QuadraticConstraint{Matrix::Zero(2, 2), vec({0, 1}), -1.0});  // x3 <= 1
  auto p = make_problem(spec);
  auto cs = build_coupling(p);
  SimNetwork net(cs);
  auto models = testing::barrier_models(p, 1.0);
  auto ws = linearize(models, scatter(vec({0, 0, 1 - 1e-6}), cs), 1.0);
  LineSearchParams params;
  params.max_backtracks = 5;
  try {
    distributed_line_search(models, ws, scatter(vec({0, 0, 1}), cs), params, net);
    FAIL() << "expected a line-search error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kLineSearch);
    EXPECT_EQ(e.agent(), 1);
  }
}

struct Instance {
  LooselyCoupledProblem problem;
  CouplingStructure cs;
  SimNetwork net;
  explicit Instance(const ProblemSpec& spec, bool allow_disconnected = false)
      : problem(make_problem(spec)), cs(build_coupling(problem)), net(cs, allow_disconnected) {}
};

TEST(NewtonSolve, ChainQp) {
  Instance r(testing::chain_qp_spec());
  auto res = newton_solve(r.problem, 1.0, scatter(Vector::Zero(3), r.cs), SolverConfig{}, r.net);
  EXPECT_LE(res.iterations, 3);
  EXPECT_LE(res.trace.back().decrement_half, 1e-8);
  EXPECT_LE((gather_average(res.S, r.cs) - vec({0, 0.5, 1})).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(NewtonSolve, AlreadyOptimalStopsImmediately) {
  Instance r(testing::chain_qp_spec());
  auto res = newton_solve(r.problem, 1.0, scatter(vec({0, 0.5, 1}), r.cs), SolverConfig{}, r.net);
  EXPECT_EQ(res.iterations, 0);
  EXPECT_LE(res.last_direction.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(res.trace.size(), 1u);
  EXPECT_EQ(res.trace[0].alpha, 0.0);
}

TEST(NewtonSolve, SoftplusMatchesOracle) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GeneratorOptions o;
    o.seed = seed;
    o.agents = 5;
    o.softplus = true;
    auto g = generate_problem(o);
    Instance r(g.spec);
    auto res = newton_solve(r.problem, 1.0, scatter(g.x0, r.cs), SolverConfig{}, r.net);
    oracle::DenseProblem dp(r.problem);
    const Vector ref = oracle::centralized_newton(dp, g.x0).x;
    EXPECT_NEAR(objective_sum(r.problem, res.S), dp.objective(ref), 1e-6) << "seed " << seed;
  }
}

TEST(NewtonSolve, Invariants) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    GeneratorOptions o;
    o.seed = seed;
    o.agents = 6;
    o.softplus = seed % 2 == 0;
    auto g = generate_problem(o);
    Instance r(g.spec);
    auto models = testing::barrier_models(r.problem, 1.0);
    double worst_consistency = 0.0, previous_h = std::numeric_limits<double>::infinity();
    bool monotone = true;
    NewtonHooks hooks;
    hooks.on_iterate = [&](Index, const Slices& S) {
      const Slices P = scatter(gather_average(S, r.cs), r.cs);
      double h = 0.0;
      for (Index i = 0; i < r.problem.num_agents(); ++i) {
        worst_consistency = std::max(worst_consistency, (S[i] - P[i]).cwiseAbs().maxCoeff());
        h += models[i].value(S[i]);
      }
      monotone = monotone && h <= previous_h;
      previous_h = h;
    };
    SolverConfig cfg;
    auto res = newton_solve(r.problem, 1.0, scatter(g.x0, r.cs), cfg, r.net, 0, hooks);
    EXPECT_LE(worst_consistency, 1e-12);
    EXPECT_TRUE(monotone) << "seed " << seed;

    double ec = 0.0;
    for (double a : res.alphas) ec += a * a * cfg.admm.eps_pri;
    EXPECT_EQ(res.consistency_bound, ec);
    for (std::size_t k = 1; k < res.trace.size(); ++k) {
      EXPECT_GE(res.trace[k].consistency_bound, res.trace[k - 1].consistency_bound);
    }
    // Per-agent stopping rule implies the global one.
    EXPECT_LE(res.trace.back().decrement_half, cfg.eps_nt);
    EXPECT_EQ(res.factorizations, static_cast<long>(res.trace.size()) * r.problem.num_agents());
  }
}

TEST(NewtonSolve, DecoupledProblemSendsNoMessages) {
  Instance r(testing::decoupled_spec(), true);
  auto res = newton_solve(r.problem, 1.0, scatter(Vector::Zero(4), r.cs), SolverConfig{}, r.net);
  EXPECT_EQ(res.messages, 0);
  oracle::DenseProblem dp(r.problem);
  const Vector ref = oracle::centralized_newton(dp, Vector::Zero(4)).x;
  EXPECT_LE((gather_average(res.S, r.cs) - ref).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(NewtonSolve, InnerNonConvergenceAborts) {
  Instance r(testing::chain_qp_spec());
  SolverConfig cfg;
  cfg.admm.max_iterations = 2;
  try {
    newton_solve(r.problem, 1.0, scatter(Vector::Zero(3), r.cs), cfg, r.net);
    FAIL() << "expected an inner non-convergence error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInnerNonConvergence);
  }
}

TEST(NewtonSolve, OuterCap) {
  GeneratorOptions o;
  o.seed = 2;
  o.softplus = true;
  auto g = generate_problem(o);
  Instance r(g.spec);
  SolverConfig cfg;
  cfg.max_outer = 1;
  try {
    newton_solve(r.problem, 1.0, scatter(g.x0, r.cs), cfg, r.net);
    FAIL() << "expected an iteration-cap error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIterationCap);
  }
}

TEST(NewtonSolve, InconsistentStartIsRejected) {
  Instance r(testing::chain_qp_spec());
  try {
    newton_solve(r.problem, 1.0, {vec({0, 1}), vec({0, 0})}, SolverConfig{}, r.net);
    FAIL() << "expected an infeasible-start error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInfeasibleStart);
  }
}

TEST(NewtonSolve, EqualityConstrainedQuadratic) {
  GeneratorOptions o;
  o.seed = 4;
  o.agents = 5;
  o.equality_probability = 0.8;
  auto g = generate_problem(o);
  Instance r(g.spec);
  auto res = newton_solve(r.problem, 1.0, scatter(g.x0, r.cs), SolverConfig{}, r.net);
  oracle::DenseProblem dp(r.problem);
  const Vector ref = oracle::centralized_newton(dp, g.x0).x;
  EXPECT_NEAR(objective_sum(r.problem, res.S), dp.objective(ref), 1e-6);
  for (Index i = 0; i < r.problem.num_agents(); ++i) {
    const auto& b = r.problem.blocks[i];
    if (b.has_equalities()) EXPECT_LE((b.eq_A * res.S[i] - b.eq_b).cwiseAbs().maxCoeff(), 1e-8);
  }
}

}  // namespace
}  // namespace dipm
