#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"

namespace dipm {
namespace {

using testing::vec;

AgentBlock scalar_block(double q, double a, double c) {
  BlockSpec b = testing::quadratic_block({0}, Matrix::Zero(1, 1), vec({q}));
  b.inequalities.push_back(QuadraticConstraint{Matrix::Zero(1, 1), vec({a}), c});
  return make_block(b);
}

TEST(BarrierCalculus, ZeroObjectiveAffineConstraint) {
  auto c = barrier_calculus(scalar_block(0.0, 1.0, -2.0), 3.0, vec({1}));  // g = s - 2
  EXPECT_EQ(c.value, 0.0);
  EXPECT_EQ(c.gradient[0], 1.0);
  EXPECT_EQ(c.hessian(0, 0), 1.0);
}

TEST(BarrierCalculus, LinearObjectiveScaledByT) {
  auto c = barrier_calculus(scalar_block(1.0, -1.0, 1.0), 4.0, vec({2}));  // f = s, g = 1 - s
  EXPECT_EQ(c.gradient[0], 3.0);
  EXPECT_EQ(c.hessian(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(c.value, 8.0);
}

TEST(BarrierCalculus, OutsideDomainNamesTheConstraint) {
  BlockSpec b = testing::quadratic_block({0, 1}, Matrix::Identity(2, 2), Vector::Zero(2));
  b.inequalities.push_back(QuadraticConstraint{Matrix::Zero(2, 2), vec({1, 0}), -1.0});
  b.inequalities.push_back(QuadraticConstraint{Matrix::Zero(2, 2), vec({0, 1}), -1.0});
  AgentBlock block = make_block(b);
  try {
    barrier_calculus(block, 1.0, vec({0, 1}));
    FAIL() << "expected a domain error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDomain);
    EXPECT_EQ(e.index(), 1);
  }
  EXPECT_TRUE(std::isinf(BarrierBlock(block, 1.0).value(vec({0, 1}))));
  EXPECT_THROW(BarrierBlock(block, 0.0), Error);
}

TEST(BarrierCalculus, FiniteDifferencesOnRandomFeasiblePoints) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    GeneratorOptions o;
    o.seed = seed;
    o.agents = 3;
    o.inequalities_per_agent = 3;
    auto g = generate_problem(o);
    auto p = make_problem(g.spec);
    auto cs = build_coupling(p);
    const Slices S = scatter(g.x0, cs);
    for (Index i = 0; i < p.num_agents(); ++i) {
      BarrierBlock h(p.blocks[i], 1.0 + static_cast<double>(seed));
      auto report = check_finite_difference(h, S[i], 1e-6);
      EXPECT_LE(report.max_error(), 1e-4) << "seed " << seed << " agent " << i;
    }
  }
}

TEST(BarrierCalculus, SummandsArePositiveSemidefinite) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    GeneratorOptions o;
    o.seed = seed;
    o.agents = 3;
    o.inequalities_per_agent = 4;
    auto g = generate_problem(o);
    auto p = make_problem(g.spec);
    auto cs = build_coupling(p);
    const Slices S = scatter(g.x0, cs);
    for (Index i = 0; i < p.num_agents(); ++i) {
      BarrierBlock h(p.blocks[i], 1.0);
      for (Index j = 0; j < p.blocks[i].num_inequalities(); ++j) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(h.barrier_hessian_term(j, S[i]));
        EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10);
      }
    }
  }
}

struct Instance {
  LooselyCoupledProblem problem;
  CouplingStructure cs;
  SimNetwork net;
  explicit Instance(const ProblemSpec& spec)
      : problem(make_problem(spec)), cs(build_coupling(problem)), net(cs, true) {}
};

TEST(IpmSolve, OneDimensionalCentralPath) {
  Instance r(testing::one_dim_spec());
  SolverConfig cfg;
  auto res = ipm_solve(r.problem, {vec({2.0})}, cfg, r.net);
  const double s = res.S[0][0];
  EXPECT_GT(s, 1.0);
  EXPECT_LE(s - 1.0, 1e-6 * (1.0 + 1e-6));
  // lambda^2 / 2 <= eps_nt with hessian t^2 near the path bounds |s - s*| by sqrt(2 eps_nt) / t.
  ASSERT_EQ(res.central_path.size(), static_cast<std::size_t>(res.stages));
  for (Index q = 0; q < res.stages; ++q) {
    const double t = barrier_parameter(cfg, q);
    EXPECT_LE(std::abs(res.central_path[q][0][0] - (1.0 + 1.0 / t)), 2.0 * std::sqrt(2.0 * cfg.eps_nt) / t) << q;
  }
}

TEST(IpmSolve, StageCountFollowsStrictStoppingRule) {
  Instance r(testing::one_dim_spec());
  SolverConfig cfg;
  // m / t_q < eps_p first holds at q = 7 since 1 / 1e6 is not below 1e-6.
  EXPECT_EQ(ipm_solve(r.problem, {vec({2.0})}, cfg, r.net).stages, 8);
  cfg.eps_p = 3e-6;
  EXPECT_EQ(ipm_solve(r.problem, {vec({2.0})}, cfg, r.net).stages, 7);
  cfg.t0 = 2.0;
  cfg.mu = 4.0;
  cfg.eps_p = 1e-2;
  auto res = ipm_solve(r.problem, {vec({2.0})}, cfg, r.net);
  EXPECT_EQ(res.stages, 4);  // 1/2, 1/8, 1/32, 1/128
  for (const auto& row : res.stage_trace) EXPECT_EQ(row.t, 2.0 * std::pow(4.0, static_cast<double>(row.stage)));
}

TEST(IpmSolve, SuboptimalityAndFeasibilityAtEveryStage) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    GeneratorOptions o;
    o.seed = seed;
    o.agents = 4;
    o.inequalities_per_agent = 2;
    o.linear_scale = 5.0;
    o.equality_probability = 0.4;
    auto g = generate_problem(o);
    Instance r(g.spec);
    SolverConfig cfg;
    cfg.eps_p = 1e-4;
    double worst_eq = 0.0;
    bool strictly_feasible = true;
    NewtonHooks hooks;
    hooks.on_iterate = [&](Index, const Slices& S) {
      for (Index i = 0; i < r.problem.num_agents(); ++i) {
        const auto& b = r.problem.blocks[i];
        strictly_feasible = strictly_feasible && BarrierBlock(b, 1.0).strictly_feasible(S[i]);
        if (b.has_equalities()) worst_eq = std::max(worst_eq, (b.eq_A * S[i] - b.eq_b).cwiseAbs().maxCoeff());
      }
    };
    auto res = ipm_solve(r.problem, scatter(g.x0, r.cs), cfg, r.net, hooks);
    oracle::DenseProblem dp(r.problem);
    const double fstar = dp.objective(oracle::centralized_ipm(dp, g.x0, 1.0, 10.0, 1e-7).x);
    const double m = static_cast<double>(r.problem.m_total());
    for (const auto& row : res.stage_trace) {
      EXPECT_LE(row.objective - fstar, m / row.t + 1e-6) << "seed " << seed << " stage " << row.stage;
    }
    EXPECT_TRUE(strictly_feasible);
    EXPECT_LE(worst_eq, 1e-8);
  }
}

TEST(IpmSolve, InfeasibleStartFailsBeforeIterating) {
  Instance r(testing::one_dim_spec());
  long before = r.net.stats().total();
  try {
    ipm_solve(r.problem, {vec({1.0})}, SolverConfig{}, r.net);
    FAIL() << "expected an infeasible-start error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInfeasibleStart);
  }
  EXPECT_EQ(r.net.stats().total(), before);
}

TEST(IpmSolve, StageCap) {
  Instance r(testing::one_dim_spec());
  SolverConfig cfg;
  cfg.max_stages = 3;
  EXPECT_THROW(ipm_solve(r.problem, {vec({2.0})}, cfg, r.net), Error);
}

}  // namespace
}  // namespace dipm
