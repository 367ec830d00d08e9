#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ntsopt/market.hpp"
#include "ntsopt/nts_dist.hpp"

namespace ntsopt {

// Daily log-return panel: returns(t, n) is the return of asset n on dates[t].
struct ReturnPanel {
  std::vector<std::string> dates;   // ISO-8601, strictly increasing
  std::vector<std::string> assets;  // unique symbols, one per column
  Eigen::MatrixXd returns;

  void validate() const;  // throws ParseError on structural problems
};

struct StandardizeResult {
  double mean = 0.0;
  double stddev = 0.0;  // T-1 divisor
  std::vector<double> residuals;
};

// Throws std::invalid_argument for fewer than two points or zero variance.
StandardizeResult standardize(const std::vector<double>& series);

// Gaussian-kernel smoothed empirical CDF evaluated on a uniform grid spanning
// [min - 3h, max + 3h]. bandwidth <= 0 selects Silverman's rule
// 1.06 * sd * n^(-1/5).
struct SmoothedEcdf {
  std::vector<double> grid;
  std::vector<double> values;
  double bandwidth = 0.0;
};

SmoothedEcdf smoothed_ecdf(const std::vector<double>& residuals, double bandwidth = 0.0,
                           int grid_size = 201);

struct EstimateConfig {
  int starts = 8;          // multistart count for the full fit
  int grid_size = 201;     // smoothed-ECDF grid
  double bandwidth = 0.0;  // <= 0 -> Silverman
  int max_evaluations = 400;  // per Nelder-Mead start
  QuadratureConfig quad{};
};

// Least-squares distance between the model CDF and a smoothed ECDF, plus a
// small penalty that grows when the chf has not decayed by the truncation
// frequency (where the quadrature would otherwise be garbage).
struct FullFit {
  StdNtsParams params{1.0, 1.0, 0.0};
  double objective = 0.0;
};

FullFit fit_stdnts_full(const SmoothedEcdf& target, const EstimateConfig& cfg = {});

// Step-2 fit: beta alone with the tail parameters pinned.
double fit_beta_given(const SmoothedEcdf& target, double alpha, double theta,
                      const EstimateConfig& cfg = {});

// One-sample Kolmogorov-Smirnov machinery. ks_statistic works against any
// continuous CDF; ks_test evaluates a standardized-NTS null. The p-value uses
// the asymptotic law with the finite-sample argument correction
// lambda = (sqrt(n) + 0.12 + 0.11/sqrt(n)) * D.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);
double ks_pvalue(double lambda);
std::pair<double, double> ks_test(const std::vector<double>& residuals, const StdNtsParams& p,
                                  const QuadratureConfig& q = {});

// T-1 divisor covariance of the columns.
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& returns);

struct FitResult {
  StdNtsParams params{1.0, 1.0, 0.0};
  double objective = 0.0;
  double ks = 0.0;
  double p_value = 0.0;
};

struct TwoStepFit {
  MarketModel model;
  FitResult index_fit;
  std::vector<FitResult> asset_fits;  // one per panel column, same order
  std::vector<std::string> warnings;
};

// Calibrates the market model: full (alpha, theta, beta) fit on the index
// residuals, then per-asset beta fits with (alpha, theta) fixed, sample
// moments for mu/sigma/cov. Incompatible implied mixing correlations are
// reported as warnings (sampling disabled), not errors.
TwoStepFit two_step_fit(const ReturnPanel& panel, const std::vector<double>& index_returns,
                        const EstimateConfig& cfg = {});

}  // namespace ntsopt
