#pragma once

#include <functional>
#include <vector>

namespace ntsopt {

// Settings for the Fourier-inversion integrals. damping <= 0 means "auto":
// each consumer picks a contour shift from the distribution's parameters.
struct QuadratureConfig {
  double truncation = 200.0;  // upper integration limit
  int nodes = 64;             // base Gauss-Legendre nodes per panel
  double tolerance = 1e-10;   // absolute tolerance on the integral
  double damping = 0.0;       // contour shift for tail integrals; <= 0 -> auto

  QuadratureConfig() = default;
  QuadratureConfig(double truncation, int nodes, double tolerance, double damping = 0.0);
  void validate() const;
};

struct IntegralResult {
  double value = 0.0;
  double error_estimate = 0.0;  // sum of final per-panel refinement deltas
  long evaluations = 0;
};

// Integrates f over [a, b] by splitting into geometric panels (finer near a)
// and doubling the Gauss-Legendre node count on each panel until two
// successive estimates agree within the panel's share of the tolerance.
// Panels that refuse to converge are bisected; if the evaluation budget runs
// out first, throws ConvergenceError.
IntegralResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                  double tolerance, int base_nodes);

// A fixed quadrature scheme on [0, truncation] for bulk evaluation: the
// integrand's expensive factor is evaluated once per node and reused across
// many x points. Panel widths follow the same geometric ladder as the
// adaptive path, with more nodes on the wide outer panels where e^{-iux}
// oscillates fastest.
struct FixedScheme {
  std::vector<double> nodes;
  std::vector<double> weights;
};

FixedScheme make_fixed_scheme(double truncation, int base_nodes);

}  // namespace ntsopt
