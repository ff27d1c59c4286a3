#ifndef DIPM_IO_HPP_
#define DIPM_IO_HPP_

#include <charconv>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dipm/coupling.hpp"
#include "dipm/error.hpp"
#include "dipm/interior_point.hpp"
#include "dipm/newton.hpp"
#include "dipm/problem.hpp"

// Problem files are JSON documents. Index sets are 1-based in files and
// 0-based in memory. See README.md for the schema.
namespace dipm::io {

using nlohmann::json;

struct ProblemFile {
  ProblemSpec spec;
  LooselyCoupledProblem problem;
  SolverConfig config;
  Vector x0;
};

namespace detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::kParse, path + ": " + what);
}

inline void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!ok.count(it.key())) fail(path, "unknown key '" + it.key() + "'");
  }
}

inline const json& require(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path, std::string("missing key '") + key + "'");
  return *it;
}

inline double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

inline Index integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<Index>();
}

inline Vector vector(const json& v, const std::string& path, Index expected = -1) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  Vector out(static_cast<Index>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k) out[static_cast<Index>(k)] = number(v[k], path + "[" + std::to_string(k) + "]");
  if (expected >= 0 && out.size() != expected) {
    throw Error(ErrorKind::kDimension, path + ": expected length " + std::to_string(expected) + ", got " +
                                           std::to_string(out.size()));
  }
  return out;
}

inline Matrix matrix(const json& v, const std::string& path, Index rows, Index cols) {
  if (!v.is_array()) fail(path, "expected an array of rows");
  if (rows >= 0 && static_cast<Index>(v.size()) != rows) {
    throw Error(ErrorKind::kDimension, path + ": expected " + std::to_string(rows) + " rows, got " + std::to_string(v.size()));
  }
  Matrix out(static_cast<Index>(v.size()), cols);
  for (std::size_t r = 0; r < v.size(); ++r) {
    out.row(static_cast<Index>(r)) = vector(v[r], path + "[" + std::to_string(r) + "]", cols).transpose();
  }
  return out;
}

inline json to_json(const Vector& v) {
  json out = json::array();
  for (Index k = 0; k < v.size(); ++k) out.push_back(v[k]);
  return out;
}

inline json to_json(const Matrix& M) {
  json out = json::array();
  for (Index r = 0; r < M.rows(); ++r) out.push_back(to_json(Vector(M.row(r).transpose())));
  return out;
}

inline ObjectiveSpec parse_objective(const json& j, const std::string& path, Index k) {
  const json& kind = require(j, path, "kind");
  if (kind == "quadratic") {
    reject_unknown(j, path, {"kind", "P", "q", "r"});
    QuadraticObjective q;
    q.P = matrix(require(j, path, "P"), path + ".P", k, k);
    q.q = j.contains("q") ? vector(j["q"], path + ".q", k) : Vector::Zero(k);
    q.r = j.contains("r") ? number(j["r"], path + ".r") : 0.0;
    return q;
  }
  if (kind == "softplus_ridge") {
    reject_unknown(j, path, {"kind", "weight", "center"});
    SoftplusRidgeObjective s;
    s.weight = j.contains("weight") ? number(j["weight"], path + ".weight") : 1.0;
    if (!(s.weight > 0)) fail(path + ".weight", "must be positive");
    s.center = j.contains("center") ? vector(j["center"], path + ".center", k) : Vector::Zero(k);
    return s;
  }
  fail(path + ".kind", "unknown objective kind " + kind.dump());
}

inline QuadraticConstraint parse_constraint(const json& j, const std::string& path, Index k) {
  const json& kind = require(j, path, "kind");
  QuadraticConstraint g;
  if (kind == "affine") {
    reject_unknown(j, path, {"kind", "a", "c"});
    g.Q = Matrix::Zero(k, k);
  } else if (kind == "quadratic") {
    reject_unknown(j, path, {"kind", "Q", "a", "c"});
    g.Q = matrix(require(j, path, "Q"), path + ".Q", k, k);
  } else {
    fail(path + ".kind", "unknown constraint kind " + kind.dump());
  }
  g.a = vector(require(j, path, "a"), path + ".a", k);
  g.c = j.contains("c") ? number(j["c"], path + ".c") : 0.0;
  return g;
}

inline void parse_solver(const json& j, SolverConfig& cfg) {
  const std::string path = "solver";
  reject_unknown(j, path,
                 {"rho", "eps_pri", "eps_dual", "eps_nt", "t0", "mu", "eps_p", "armijo", "shrink", "max_backtracks",
                  "max_inner", "max_outer", "max_stages", "warm_start", "scale_rho_with_t"});
  auto num = [&](const char* key, double& dst) {
    if (j.contains(key)) dst = number(j[key], path + "." + key);
  };
  auto cap = [&](const char* key, Index& dst) {
    if (j.contains(key)) dst = integer(j[key], path + "." + key);
  };
  auto flag = [&](const char* key, bool& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_boolean()) fail(path + "." + key, "expected true or false");
    dst = j[key].get<bool>();
  };
  num("rho", cfg.admm.rho);
  num("eps_pri", cfg.admm.eps_pri);
  num("eps_dual", cfg.admm.eps_dual);
  num("eps_nt", cfg.eps_nt);
  num("t0", cfg.t0);
  num("mu", cfg.mu);
  num("eps_p", cfg.eps_p);
  num("armijo", cfg.line_search.armijo);
  num("shrink", cfg.line_search.shrink);
  cap("max_backtracks", cfg.line_search.max_backtracks);
  cap("max_inner", cfg.admm.max_iterations);
  cap("max_outer", cfg.max_outer);
  cap("max_stages", cfg.max_stages);
  flag("warm_start", cfg.warm_start);
  flag("scale_rho_with_t", cfg.scale_rho_with_t);
}

inline std::string line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) line += text[k] == '\n';
  return std::to_string(line);
}

}  // namespace detail

// Violated constraints of a starting point, one description per entry.
inline std::vector<std::string> start_violations(const LooselyCoupledProblem& problem, const Vector& x0) {
  std::vector<std::string> out;
  CouplingStructure cs = build_coupling(problem);
  Slices S = scatter(x0, cs);
  for (Index i = 0; i < problem.num_agents(); ++i) {
    const AgentBlock& b = problem.blocks[i];
    for (Index j = 0; j < b.num_inequalities(); ++j) {
      const double g = b.inequalities[j]->value(S[i]);
      if (!(g < 0.0)) {
        std::ostringstream os;
        os << "agent " << i << " inequality " << j << ": g = " << g << " (strict feasibility required)";
        out.push_back(os.str());
      }
    }
    if (b.has_equalities()) {
      Vector r = b.eq_A * S[i] - b.eq_b;
      for (Index k = 0; k < r.size(); ++k) {
        if (std::abs(r[k]) > 1e-9) {
          std::ostringstream os;
          os << "agent " << i << " equality " << k << ": residual " << r[k];
          out.push_back(os.str());
        }
      }
    }
  }
  return out;
}

inline ProblemFile parse_problem_text(const std::string& text) {
  using namespace detail;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, "line " + line_of(text, e.byte) + ": " + e.what());
  }
  reject_unknown(doc, "$", {"n", "agents", "x0", "solver"});
  ProblemFile pf;
  pf.spec.n = integer(require(doc, "$", "n"), "n");
  if (pf.spec.n < 1) fail("n", "must be positive");
  const json& agents = require(doc, "$", "agents");
  if (!agents.is_array() || agents.empty()) fail("agents", "expected a nonempty array");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string path = "agents[" + std::to_string(i) + "]";
    const json& a = agents[i];
    reject_unknown(a, path, {"index_set", "objective", "inequalities", "equalities"});
    BlockSpec b;
    const json& set = require(a, path, "index_set");
    if (!set.is_array() || set.empty()) fail(path + ".index_set", "expected a nonempty array");
    for (std::size_t k = 0; k < set.size(); ++k) {
      const Index j = integer(set[k], path + ".index_set[" + std::to_string(k) + "]");
      if (j < 1 || j > pf.spec.n) fail(path + ".index_set", "index " + std::to_string(j) + " outside 1..n");
      if (!b.index_set.empty() && b.index_set.back() >= j - 1) fail(path + ".index_set", "indices must be strictly increasing");
      b.index_set.push_back(j - 1);
    }
    const Index k = static_cast<Index>(b.index_set.size());
    b.objective = parse_objective(require(a, path, "objective"), path + ".objective", k);
    if (a.contains("inequalities")) {
      const json& gs = a["inequalities"];
      if (!gs.is_array()) fail(path + ".inequalities", "expected an array");
      for (std::size_t c = 0; c < gs.size(); ++c) {
        b.inequalities.push_back(parse_constraint(gs[c], path + ".inequalities[" + std::to_string(c) + "]", k));
      }
    }
    if (a.contains("equalities")) {
      const json& eq = a["equalities"];
      const std::string epath = path + ".equalities";
      reject_unknown(eq, epath, {"A", "b"});
      b.eq_A = matrix(require(eq, epath, "A"), epath + ".A", -1, k);
      b.eq_b = vector(require(eq, epath, "b"), epath + ".b", b.eq_A.rows());
    }
    pf.spec.blocks.push_back(std::move(b));
  }
  pf.x0 = vector(require(doc, "$", "x0"), "x0", pf.spec.n);
  if (doc.contains("solver")) parse_solver(doc["solver"], pf.config);
  validate(pf.config);
  pf.problem = make_problem(pf.spec);
  build_coupling(pf.problem);

  auto violations = start_violations(pf.problem, pf.x0);
  if (!violations.empty()) {
    std::string msg = "x0 is not strictly feasible:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw Error(ErrorKind::kInfeasibleStart, msg);
  }
  return pf;
}

inline ProblemFile parse_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kParse, "cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_problem_text(text);
}

inline json emit_problem(const ProblemSpec& spec, const Vector& x0, const SolverConfig& cfg) {
  using detail::to_json;
  json doc;
  doc["n"] = spec.n;
  doc["agents"] = json::array();
  for (const auto& b : spec.blocks) {
    json a;
    json set = json::array();
    for (Index j : b.index_set) set.push_back(j + 1);
    a["index_set"] = set;
    if (const auto* q = std::get_if<QuadraticObjective>(&b.objective)) {
      a["objective"] = {{"kind", "quadratic"}, {"P", to_json(q->P)}, {"q", to_json(q->q)}, {"r", q->r}};
    } else {
      const auto& s = std::get<SoftplusRidgeObjective>(b.objective);
      a["objective"] = {{"kind", "softplus_ridge"}, {"weight", s.weight}, {"center", to_json(s.center)}};
    }
    if (!b.inequalities.empty()) {
      json gs = json::array();
      for (const auto& g : b.inequalities) {
        if (g.affine()) {
          gs.push_back({{"kind", "affine"}, {"a", to_json(g.a)}, {"c", g.c}});
        } else {
          gs.push_back({{"kind", "quadratic"}, {"Q", to_json(g.Q)}, {"a", to_json(g.a)}, {"c", g.c}});
        }
      }
      a["inequalities"] = gs;
    }
    if (b.eq_A.rows() > 0) a["equalities"] = {{"A", to_json(b.eq_A)}, {"b", to_json(b.eq_b)}};
    doc["agents"].push_back(a);
  }
  doc["x0"] = to_json(x0);
  doc["solver"] = {{"rho", cfg.admm.rho},
                   {"eps_pri", cfg.admm.eps_pri},
                   {"eps_dual", cfg.admm.eps_dual},
                   {"eps_nt", cfg.eps_nt},
                   {"t0", cfg.t0},
                   {"mu", cfg.mu},
                   {"eps_p", cfg.eps_p},
                   {"armijo", cfg.line_search.armijo},
                   {"shrink", cfg.line_search.shrink},
                   {"max_backtracks", cfg.line_search.max_backtracks},
                   {"max_inner", cfg.admm.max_iterations},
                   {"max_outer", cfg.max_outer},
                   {"max_stages", cfg.max_stages},
                   {"warm_start", cfg.warm_start},
                   {"scale_rho_with_t", cfg.scale_rho_with_t}};
  return doc;
}

// Shortest round-trip decimal form; independent of the C locale.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

inline const char* trace_header() {
  return "stage,t,outer,inner_iterations,decrement_half,alpha,max_primal_residual,max_dual_residual,"
         "barrier_objective,objective,messages,consistency_bound";
}

inline void write_trace(std::ostream& os, const std::vector<TraceRow>& rows) {
  os << trace_header() << '\n';
  for (const auto& r : rows) {
    os << r.stage << ',' << format_double(r.t) << ',' << r.outer << ',' << r.inner_iterations << ','
       << format_double(r.decrement_half) << ',' << format_double(r.alpha) << ','
       << format_double(r.max_primal_residual) << ',' << format_double(r.max_dual_residual) << ','
       << format_double(r.barrier_objective) << ',' << format_double(r.objective) << ',' << r.messages << ','
       << format_double(r.consistency_bound) << '\n';
  }
}

inline void write_stage_trace(std::ostream& os, const std::vector<StageRow>& rows) {
  os << "stage,t,newton_iterations,admm_iterations,gap_bound,objective\n";
  for (const auto& r : rows) {
    os << r.stage << ',' << format_double(r.t) << ',' << r.newton_iterations << ',' << r.admm_iterations << ','
       << format_double(r.gap_bound) << ',' << format_double(r.objective) << '\n';
  }
}

}  // namespace dipm::io

#endif  // DIPM_IO_HPP_
