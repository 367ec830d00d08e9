#include "ntsopt/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ntsopt/errors.hpp"
#include "ntsopt/gauss_legendre.hpp"

namespace ntsopt {

QuadratureConfig::QuadratureConfig(double truncation_, int nodes_, double tolerance_, double damping_)
    : truncation(truncation_), nodes(nodes_), tolerance(tolerance_), damping(damping_) {
  validate();
}

void QuadratureConfig::validate() const {
  if (!(truncation > 0.0) || !std::isfinite(truncation))
    throw std::invalid_argument("QuadratureConfig: truncation must be positive and finite");
  if (nodes < 8) throw std::invalid_argument("QuadratureConfig: need at least 8 base nodes");
  if (!(tolerance > 0.0) || tolerance > 1e-4)
    throw std::invalid_argument("QuadratureConfig: tolerance must lie in (0, 1e-4]");
  if (!std::isfinite(damping)) throw std::invalid_argument("QuadratureConfig: damping must be finite");
}

namespace {

double panel_sum(const std::function<double(double)>& f, double a, double b, int n) {
  const auto& rule = gauss_legendre(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return sum * half;
}

std::vector<double> panel_boundaries(double a, double b) {
  // Geometric ladder: first panel has width min(1, span)/8, each subsequent
  // panel doubles, so narrow panels cover the region near a where Fourier
  // integrands vary fastest.
  std::vector<double> cuts{a};
  const double span = b - a;
  double width = std::min(1.0, span) / 8.0;
  double x = a;
  while (x + width < b) {
    x += width;
    cuts.push_back(x);
    width *= 2.0;
  }
  cuts.push_back(b);
  return cuts;
}

struct PanelBudget {
  long remaining;
};

double integrate_panel(const std::function<double(double)>& f, double a, double b, double tol,
                       int base_nodes, int depth, PanelBudget& budget, double& error_acc,
                       long& evals) {
  const int max_nodes = 2048;
  double coarse = panel_sum(f, a, b, base_nodes);
  evals += base_nodes;
  budget.remaining -= base_nodes;
  for (int n = 2 * base_nodes; n <= max_nodes; n *= 2) {
    if (budget.remaining <= 0)
      throw ConvergenceError("integrate_adaptive: evaluation budget exhausted before reaching tolerance");
    double fine = panel_sum(f, a, b, n);
    evals += n;
    budget.remaining -= n;
    double delta = std::abs(fine - coarse);
    if (delta <= tol) {
      error_acc += delta;
      return fine;
    }
    coarse = fine;
  }
  if (depth >= 24)
    throw ConvergenceError("integrate_adaptive: panel refinement did not converge");
  const double mid = 0.5 * (a + b);
  return integrate_panel(f, a, mid, 0.5 * tol, base_nodes, depth + 1, budget, error_acc, evals) +
         integrate_panel(f, mid, b, 0.5 * tol, base_nodes, depth + 1, budget, error_acc, evals);
}

}  // namespace

IntegralResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                  double tolerance, int base_nodes) {
  if (!(b > a)) throw std::invalid_argument("integrate_adaptive: need b > a");
  if (!(tolerance > 0.0)) throw std::invalid_argument("integrate_adaptive: tolerance must be positive");
  base_nodes = std::max(base_nodes, 8);

  auto cuts = panel_boundaries(a, b);
  const double tol_per_panel = tolerance / static_cast<double>(cuts.size() - 1);
  PanelBudget budget{4'000'000};
  IntegralResult result;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    result.value += integrate_panel(f, cuts[k], cuts[k + 1], tol_per_panel, base_nodes, 0, budget,
                                    result.error_estimate, result.evaluations);
  }
  return result;
}

FixedScheme make_fixed_scheme(double truncation, int base_nodes) {
  if (!(truncation > 0.0)) throw std::invalid_argument("make_fixed_scheme: truncation must be positive");
  base_nodes = std::max(base_nodes, 8);
  auto cuts = panel_boundaries(0.0, truncation);
  FixedScheme scheme;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k], b = cuts[k + 1];
    // Enough nodes to resolve e^{-iux} for |x| up to ~12 at roughly three
    // nodes per oscillation, capped to keep the scheme small.
    const double periods = (b - a) * 12.0 / (2.0 * std::numbers::pi);
    int n = std::max(base_nodes, static_cast<int>(std::ceil(periods * 3.0)));
    n = std::min(n, 256);
    const auto& rule = gauss_legendre(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
      scheme.nodes.push_back(mid + half * rule.nodes[i]);
      scheme.weights.push_back(half * rule.weights[i]);
    }
  }
  return scheme;
}

}  // namespace ntsopt
