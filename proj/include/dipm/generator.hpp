#ifndef DIPM_GENERATOR_HPP_
#define DIPM_GENERATOR_HPP_

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "dipm/problem.hpp"

namespace dipm {

struct GeneratorOptions {
  std::uint64_t seed = 1;
  Index agents = 5;
  Index min_block = 2;
  Index max_block = 5;
  Index max_overlap = 0;                // cap on variables shared with the previous agent; 0 for none
  double extra_link_probability = 0.3;  // chance of one extra shared variable with an older agent
  Index inequalities_per_agent = 0;
  double equality_probability = 0.0;    // chance that an agent gets one equality row
  double linear_scale = 2.0;            // q entries drawn from [-scale, scale]
  bool softplus = false;                // softplus+ridge objectives instead of quadratics
};

struct GeneratedProblem {
  ProblemSpec spec;
  Vector x0;
};

namespace detail {

// Platform-independent draws on top of mt19937_64.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) {
    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }
  Index integer(Index lo, Index hi) {  // inclusive
    return lo + static_cast<Index>(rng_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  bool bernoulli(double p) { return uniform(0.0, 1.0) < p; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace detail

// Random strongly convex, loosely coupled problem: agents form a chain with
// overlap of at least one variable, plus occasional extra links. The start
// point is strictly feasible by construction.
inline GeneratedProblem generate_problem(const GeneratorOptions& opt) {
  detail::Draw draw(opt.seed);
  GeneratedProblem out;
  std::vector<std::vector<Index>> sets;
  Index n = 0;
  for (Index i = 0; i < opt.agents; ++i) {
    const Index size = draw.integer(opt.min_block, opt.max_block);
    std::vector<Index> set;
    if (i == 0) {
      for (Index k = 0; k < size; ++k) set.push_back(n++);
    } else {
      const auto& prev = sets.back();
      Index widest = std::max<Index>(1, std::min<Index>(static_cast<Index>(prev.size()), size) - 1);
      if (opt.max_overlap > 0) widest = std::min(widest, opt.max_overlap);
      const Index overlap = draw.integer(1, widest);
      set.assign(prev.end() - overlap, prev.end());
      while (static_cast<Index>(set.size()) < size) set.push_back(n++);
      if (i >= 2 && static_cast<Index>(set.size()) < opt.max_block && draw.bernoulli(opt.extra_link_probability)) {
        const auto& older = sets[static_cast<std::size_t>(draw.integer(0, i - 2))];
        const Index j = older[static_cast<std::size_t>(draw.integer(0, static_cast<Index>(older.size()) - 1))];
        if (std::find(set.begin(), set.end(), j) == set.end()) set.push_back(j);
      }
      std::sort(set.begin(), set.end());
    }
    sets.push_back(std::move(set));
  }

  out.spec.n = n;
  out.x0.resize(n);
  for (Index j = 0; j < n; ++j) out.x0[j] = draw.uniform(-0.5, 0.5);

  for (const auto& set : sets) {
    const Index k = static_cast<Index>(set.size());
    BlockSpec b;
    b.index_set = set;
    Vector s0(k);
    for (Index a = 0; a < k; ++a) s0[a] = out.x0[set[a]];

    if (opt.softplus) {
      SoftplusRidgeObjective o;
      o.weight = draw.uniform(0.5, 1.5);
      o.center.resize(k);
      for (Index a = 0; a < k; ++a) o.center[a] = draw.uniform(-opt.linear_scale, opt.linear_scale);
      b.objective = o;
    } else {
      Matrix M(k, k);
      for (Index r = 0; r < k; ++r)
        for (Index c = 0; c < k; ++c) M(r, c) = draw.uniform(-1.0, 1.0);
      QuadraticObjective o;
      o.P = M.transpose() * M / static_cast<double>(k) + draw.uniform(0.5, 1.5) * Matrix::Identity(k, k);
      o.q.resize(k);
      for (Index a = 0; a < k; ++a) o.q[a] = draw.uniform(-opt.linear_scale, opt.linear_scale);
      o.r = 0.0;
      b.objective = o;
    }

    for (Index c = 0; c < opt.inequalities_per_agent; ++c) {
      QuadraticConstraint g;
      g.Q = Matrix::Zero(k, k);
      if (c % 2 == 1) {
        for (Index a = 0; a < k; ++a) g.Q(a, a) = draw.uniform(0.0, 1.0);
      }
      g.a.resize(k);
      for (Index a = 0; a < k; ++a) g.a[a] = draw.uniform(-1.0, 1.0);
      const double slack = draw.uniform(0.2, 1.0);
      g.c = -(0.5 * s0.dot(g.Q * s0) + g.a.dot(s0)) - slack;
      b.inequalities.push_back(std::move(g));
    }

    if (k >= 2 && draw.bernoulli(opt.equality_probability)) {
      b.eq_A.resize(1, k);
      for (Index a = 0; a < k; ++a) b.eq_A(0, a) = draw.uniform(-1.0, 1.0);
      b.eq_b = b.eq_A * s0;
    }
    out.spec.blocks.push_back(std::move(b));
  }
  return out;
}

}  // namespace dipm

#endif  // DIPM_GENERATOR_HPP_
