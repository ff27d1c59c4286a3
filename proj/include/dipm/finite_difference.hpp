#ifndef DIPM_FINITE_DIFFERENCE_HPP_
#define DIPM_FINITE_DIFFERENCE_HPP_

#include <algorithm>
#include <cmath>

#include "dipm/error.hpp"
#include "dipm/problem.hpp"

namespace dipm {

struct FiniteDifferenceReport {
  double gradient_error = 0.0;  // max relative error over components
  double hessian_error = 0.0;
  double hessian_asymmetry = 0.0;
  double max_error() const { return std::max(gradient_error, hessian_error); }
};

// Central differences: gradient from values, Hessian from gradients.
// Relative errors are measured against max(1, |analytic|).
inline FiniteDifferenceReport check_finite_difference(const SmoothFunction& f, const Vector& point, double h) {
  const Index k = point.size();
  auto finite_or_throw = [](double v) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kDomain, "non-finite value at perturbed point");
    return v;
  };

  FiniteDifferenceReport report;
  const Vector g = f.gradient(point);
  const Matrix H = f.hessian(point);
  const double hscale = std::max(1.0, H.cwiseAbs().maxCoeff());
  report.hessian_asymmetry = (H - H.transpose()).cwiseAbs().maxCoeff() / hscale;

  for (Index a = 0; a < k; ++a) {
    Vector plus = point, minus = point;
    plus[a] += h;
    minus[a] -= h;
    const double fd = (finite_or_throw(f.value(plus)) - finite_or_throw(f.value(minus))) / (2.0 * h);
    report.gradient_error = std::max(report.gradient_error, std::abs(fd - g[a]) / std::max(1.0, std::abs(g[a])));

    const Vector gd = (f.gradient(plus) - f.gradient(minus)) / (2.0 * h);
    if (!gd.allFinite()) throw Error(ErrorKind::kDomain, "non-finite gradient at perturbed point");
    for (Index b = 0; b < k; ++b) {
      report.hessian_error =
          std::max(report.hessian_error, std::abs(gd[b] - H(b, a)) / std::max(1.0, std::abs(H(b, a))));
    }
  }
  return report;
}

// Worst report over the objective and every inequality of a block.
inline FiniteDifferenceReport check_finite_difference(const AgentBlock& block, const Vector& point, double h) {
  FiniteDifferenceReport worst = check_finite_difference(*block.objective, point, h);
  for (const auto& g : block.inequalities) {
    auto r = check_finite_difference(*g, point, h);
    worst.gradient_error = std::max(worst.gradient_error, r.gradient_error);
    worst.hessian_error = std::max(worst.hessian_error, r.hessian_error);
    worst.hessian_asymmetry = std::max(worst.hessian_asymmetry, r.hessian_asymmetry);
  }
  return worst;
}

}  // namespace dipm

#endif  // DIPM_FINITE_DIFFERENCE_HPP_
