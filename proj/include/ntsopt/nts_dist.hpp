#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "ntsopt/quadrature.hpp"

namespace ntsopt {

using cdouble = std::complex<double>;

// Tempered stable subordinator with unit mean: index alpha in (0, 2),
// tempering theta > 0. Time-1 marginal has E[T] = 1, var(T) = (2-alpha)/(2*theta).
struct SubordinatorParams {
  double alpha;
  double theta;
  SubordinatorParams(double alpha, double theta);
};

// Standardized normal tempered stable law: zero mean, unit variance,
// skew/tail parameter beta with |beta| < sqrt(2*theta/(2-alpha)).
// The normal mixture scale gamma is pinned by the unit-variance constraint.
struct StdNtsParams {
  double alpha;
  double theta;
  double beta;
  StdNtsParams(double alpha, double theta, double beta);

  double beta_bound() const;  // sqrt(2*theta/(2-alpha))
  double gamma2() const;      // 1 - beta^2*(2-alpha)/(2*theta)
  double gamma() const;
  SubordinatorParams subordinator() const { return {alpha, theta}; }
};

// Admissible beta range for given tail parameters, without constructing params.
double stdnts_beta_bound(double alpha, double theta);

// E exp(iuT) for the unit-mean subordinator; u may be complex as long as
// Re(theta - iu) > 0 (principal branch), else a domain error.
cdouble subordinator_chf(cdouble u, const SubordinatorParams& p);

// Characteristic function / its log for the standardized law. Complex
// arguments are accepted inside the analyticity strip where
// Re(theta - i*beta*z + gamma^2 z^2 / 2) > 0.
cdouble stdnts_chf(cdouble z, const StdNtsParams& p);
cdouble stdnts_log_chf(cdouble z, const StdNtsParams& p);

// Derivative of log chf with respect to beta at fixed (alpha, theta), with
// gamma^2 re-expressed through beta first (the standardization constraint
// makes gamma depend on beta). Appears in all beta-sensitivities below.
cdouble stdnts_log_chf_dbeta(cdouble z, const StdNtsParams& p);

// Positive contour shift delta with theta - beta*d - gamma^2 d^2 / 2 > 0 for
// d in [0, delta]; half the positive root of the boundary quadratic.
double auto_damping(const StdNtsParams& p);

double stdnts_cdf(double x, const StdNtsParams& p, const QuadratureConfig& q = {});
double stdnts_pdf(double x, const StdNtsParams& p, const QuadratureConfig& q = {});
double stdnts_quantile(double eta, const StdNtsParams& p, const QuadratureConfig& q = {});

// dF/dbeta at fixed x, and the induced quantile sensitivity
// dF^{-1}/dbeta = -(dF/dbeta)(q) / pdf(q).
double stdnts_cdf_dbeta(double x, const StdNtsParams& p, const QuadratureConfig& q = {});
double stdnts_quantile_dbeta(double eta, const StdNtsParams& p, const QuadratureConfig& q = {});

// Exact samplers. Subordinator: Zolotarev/Kanter positive-stable draws with
// exponential tilting by rejection. Standardized law: X = beta*(T-1) + gamma*sqrt(T)*Z.
std::vector<double> sample_subordinator(const SubordinatorParams& p, std::size_t n, std::uint64_t seed);
std::vector<double> sample_stdnts(const StdNtsParams& p, std::size_t n, std::uint64_t seed);

// Bulk CDF evaluator: one chf pass over a fixed node scheme shared by all
// grid points, monotone interpolation in between. Points outside the table
// range fall back to the integral. Build cost ~tens of ms; lookups ~ns.
class StdNtsCdfTable {
 public:
  StdNtsCdfTable(const StdNtsParams& p, const QuadratureConfig& q = {}, int grid_points = 4097,
                 double tail_mass = 1e-8);
  double operator()(double x) const;
  double x_lo() const { return x_lo_; }
  double x_hi() const { return x_hi_; }

 private:
  StdNtsParams params_;
  QuadratureConfig quad_;
  double x_lo_, x_hi_, step_;
  std::vector<double> values_;
};

// F evaluated at many points with one shared chf pass (exact nodes, no
// interpolation); the workhorse behind curve fitting.
std::vector<double> stdnts_cdf_many(const std::vector<double>& xs, const StdNtsParams& p,
                                    const QuadratureConfig& q = {});

// |chf| at the truncation frequency; ~0 whenever inversion integrals are
// well-truncated, O(1) in the slow-decay corner of the parameter box.
double stdnts_chf_tail_magnitude(const StdNtsParams& p, double truncation);

}  // namespace ntsopt
