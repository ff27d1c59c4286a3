// dipm: run the distributed solvers and their centralized references on
// problem files, or generate random problem files.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dipm/dipm.hpp"
#include "dipm/io.hpp"

namespace {

using namespace dipm;
using nlohmann::json;

enum ExitCode {
  kOk = 0,
  kOther = 1,
  kParseFailure = 2,
  kInfeasible = 3,
  kInner = 4,
  kLineSearchFailure = 5,
  kCap = 6,
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse:
    case ErrorKind::kDimension:
    case ErrorKind::kStructural: return kParseFailure;
    case ErrorKind::kInfeasibleStart: return kInfeasible;
    case ErrorKind::kInnerNonConvergence: return kInner;
    case ErrorKind::kLineSearch: return kLineSearchFailure;
    case ErrorKind::kIterationCap: return kCap;
    default: return kOther;
  }
}

// Overrides for SolverConfig fields; unset options keep the file's values.
struct Overrides {
  std::optional<double> rho, eps_pri, eps_dual, eps_nt, t0, mu, eps_p, armijo, shrink;
  std::optional<Index> max_backtracks, max_inner, max_outer, max_stages;
  std::optional<bool> warm_start, scale_rho_with_t;

  void add(CLI::App& app) {
    app.add_option("--rho", rho, "ADMM penalty");
    app.add_option("--eps-pri", eps_pri, "ADMM primal tolerance (squared norm)");
    app.add_option("--eps-dual", eps_dual, "ADMM dual tolerance (squared norm)");
    app.add_option("--eps-nt", eps_nt, "Newton decrement tolerance");
    app.add_option("--t0", t0, "initial barrier parameter");
    app.add_option("--mu", mu, "barrier growth factor");
    app.add_option("--eps-p", eps_p, "barrier stopping tolerance on m/t");
    app.add_option("--armijo", armijo, "Armijo constant in (0, 0.5)");
    app.add_option("--shrink", shrink, "backtracking factor in (0, 1)");
    app.add_option("--max-backtracks", max_backtracks);
    app.add_option("--max-inner", max_inner, "ADMM iteration cap");
    app.add_option("--max-outer", max_outer, "Newton iteration cap");
    app.add_option("--max-stages", max_stages, "barrier stage cap");
    app.add_option("--warm-start", warm_start, "warm-start ADMM with the previous direction (true/false)");
    app.add_option("--scale-rho-with-t", scale_rho_with_t, "use rho * t in barrier stage t (true/false)");
  }

  void apply(SolverConfig& c) const {
    if (rho) c.admm.rho = *rho;
    if (eps_pri) c.admm.eps_pri = *eps_pri;
    if (eps_dual) c.admm.eps_dual = *eps_dual;
    if (eps_nt) c.eps_nt = *eps_nt;
    if (t0) c.t0 = *t0;
    if (mu) c.mu = *mu;
    if (eps_p) c.eps_p = *eps_p;
    if (armijo) c.line_search.armijo = *armijo;
    if (shrink) c.line_search.shrink = *shrink;
    if (max_backtracks) c.line_search.max_backtracks = *max_backtracks;
    if (max_inner) c.admm.max_iterations = *max_inner;
    if (max_outer) c.max_outer = *max_outer;
    if (max_stages) c.max_stages = *max_stages;
    if (warm_start) c.warm_start = *warm_start;
    if (scale_rho_with_t) c.scale_rho_with_t = *scale_rho_with_t;
  }
};

json to_json(const Vector& v) {
  json a = json::array();
  for (Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
  return a;
}

struct Outcome {
  Vector x;
  json fields = json::object();
};

Outcome run_distributed(const io::ProblemFile& pf, bool barrier, const std::filesystem::path& out) {
  const auto& problem = pf.problem;
  CouplingStructure cs = build_coupling(problem);
  SimNetwork net(cs, true);
  Slices S0 = scatter(pf.x0, cs);
  Outcome o;
  Slices S;
  std::ofstream trace(out / "trace.csv");
  if (barrier) {
    IpmResult r = ipm_solve(problem, std::move(S0), pf.config, net);
    io::write_trace(trace, r.trace);
    std::ofstream stages(out / "stages.csv");
    io::write_stage_trace(stages, r.stage_trace);
    S = r.S;
    o.fields["stages"] = r.stages;
    o.fields["t_final"] = r.t_final;
    o.fields["gap_bound"] = static_cast<double>(problem.m_total()) / r.t_final;
    o.fields["outer_iterations"] = r.trace.size();
    o.fields["consistency_bound"] = r.consistency_bound;
  } else {
    SolverConfig cfg = pf.config;
    NewtonResult r = newton_solve(problem, 1.0, std::move(S0), cfg, net);
    io::write_trace(trace, r.trace);
    S = r.S;
    o.fields["outer_iterations"] = r.iterations;
    o.fields["decrement_half"] = r.trace.back().decrement_half;
    o.fields["consistency_bound"] = r.consistency_bound;
  }
  o.x = gather_average(S, cs);
  o.fields["consistency_error"] = consistency_error(S, cs);
  const auto& st = net.stats();
  o.fields["messages"] = {{"data", st.data_messages}, {"consensus", st.consensus_messages}, {"total", st.total()},
                          {"rounds", st.rounds}};
  o.fields["max_degree"] = cs.max_degree();
  return o;
}

Outcome run_oracle(const io::ProblemFile& pf, bool barrier) {
  oracle::DenseProblem dp(pf.problem);
  oracle::OracleConfig cfg;
  cfg.line_search = pf.config.line_search;
  Outcome o;
  if (barrier) {
    auto r = oracle::centralized_ipm(dp, pf.x0, pf.config.t0, pf.config.mu, pf.config.eps_p, cfg, pf.config.max_stages);
    o.x = r.x;
    o.fields["stages"] = r.stages;
    o.fields["t_final"] = r.t_final;
    o.fields["gap_bound"] = static_cast<double>(pf.problem.m_total()) / r.t_final;
  } else {
    auto r = oracle::centralized_newton(dp, pf.x0, cfg);
    o.x = r.x;
    o.fields["outer_iterations"] = r.iterations;
    o.fields["decrement_half"] = r.decrement_half;
  }
  return o;
}

void add_quality(json& j, const oracle::DenseProblem& dp, const Vector& x) {
  j["objective"] = dp.objective(x);
  j["max_inequality"] = dp.problem().m_total() > 0 ? json(dp.max_inequality(x)) : json(nullptr);
  j["equality_violation"] = dp.equality_violation(x);
  j["x"] = to_json(x);
}

int run(const std::string& mode, const std::string& problem_path, const std::string& out_dir,
        const Overrides& overrides) {
  io::ProblemFile pf = io::parse_problem(problem_path);
  overrides.apply(pf.config);
  validate(pf.config);
  const bool constrained = pf.problem.m_total() > 0;
  if (mode == "newton" && constrained) {
    throw Error(ErrorKind::kParse, "newton mode needs a problem without inequalities; use ipm");
  }
  std::filesystem::path out(out_dir);
  std::filesystem::create_directories(out);
  oracle::DenseProblem dp(pf.problem);

  const auto start = std::chrono::steady_clock::now();
  json summary;
  summary["mode"] = mode;
  summary["problem"] = problem_path;
  summary["agents"] = pf.problem.num_agents();
  summary["n"] = pf.problem.n;
  summary["m_total"] = pf.problem.m_total();

  if (mode == "newton" || mode == "ipm") {
    Outcome o = run_distributed(pf, mode == "ipm", out);
    summary.update(o.fields);
    add_quality(summary, dp, o.x);
  } else if (mode == "oracle-newton" || mode == "oracle-ipm") {
    Outcome o = run_oracle(pf, mode == "oracle-ipm");
    summary.update(o.fields);
    add_quality(summary, dp, o.x);
  } else if (mode == "compare") {
    Outcome d = run_distributed(pf, constrained, out);
    Outcome r = run_oracle(pf, constrained);
    summary.update(d.fields);
    add_quality(summary, dp, d.x);
    json ref;
    add_quality(ref, dp, r.x);
    summary["oracle"] = ref;
    summary["gap_inf"] = (d.x - r.x).cwiseAbs().maxCoeff();
    summary["objective_gap"] = dp.objective(d.x) - dp.objective(r.x);
  } else {
    throw Error(ErrorKind::kParse, "unknown mode " + mode);
  }
  summary["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream(out / "summary.json") << summary.dump(2) << '\n';
  std::cout << summary.dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed Newton and interior-point solvers for loosely coupled problems"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "solve a problem file");
  std::string mode = "compare", problem_path, out_dir = ".";
  run_cmd->add_option("--mode", mode, "newton | ipm | oracle-newton | oracle-ipm | compare")
      ->check(CLI::IsMember({"newton", "ipm", "oracle-newton", "oracle-ipm", "compare"}))
      ->capture_default_str();
  run_cmd->add_option("--problem", problem_path, "problem file (JSON)")->required();
  run_cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
  Overrides overrides;
  overrides.add(*run_cmd);

  auto* gen_cmd = app.add_subcommand("generate", "write a random strongly convex problem file");
  GeneratorOptions gen;
  std::string gen_out;
  gen_cmd->add_option("--seed", gen.seed)->capture_default_str();
  gen_cmd->add_option("--agents", gen.agents)->capture_default_str();
  gen_cmd->add_option("--min-block", gen.min_block)->capture_default_str();
  gen_cmd->add_option("--max-block", gen.max_block)->capture_default_str();
  gen_cmd->add_option("--max-overlap", gen.max_overlap, "0 for no cap")->capture_default_str();
  gen_cmd->add_option("--extra-link-probability", gen.extra_link_probability)->capture_default_str();
  gen_cmd->add_option("--inequalities", gen.inequalities_per_agent, "per agent")->capture_default_str();
  gen_cmd->add_option("--equality-probability", gen.equality_probability)->capture_default_str();
  gen_cmd->add_option("--linear-scale", gen.linear_scale)->capture_default_str();
  gen_cmd->add_flag("--softplus", gen.softplus, "softplus + ridge objectives");
  gen_cmd->add_option("--out", gen_out, "output file; stdout when absent");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kParseFailure;
  }

  try {
    if (*run_cmd) return run(mode, problem_path, out_dir, overrides);
    if (gen.agents < 1 || gen.min_block < 1 || gen.max_block < gen.min_block) {
      throw Error(ErrorKind::kParse, "invalid generator block sizes");
    }
    GeneratedProblem g = generate_problem(gen);
    const std::string text = io::emit_problem(g.spec, g.x0, SolverConfig{}).dump(2) + "\n";
    if (gen_out.empty()) {
      std::cout << text;
    } else {
      std::ofstream(gen_out) << text;
    }
    return kOk;
  } catch (const Error& e) {
    std::cerr << "dipm: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "dipm: " << e.what() << '\n';
    return kOther;
  }
}
