#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ntsopt/nts_dist.hpp"

namespace ntsopt {

// Joint model for N assets: R_n = mu_n + sigma_n * X_n where each X_n is a
// standardized NTS variable; all assets share the subordinator (alpha, theta)
// and the mixing normals are correlated. Calibrated from data by the
// estimation module or built directly for synthetic studies.
class MarketModel {
 public:
  // cov is the covariance of the *returns* R. Throws InvalidModelError when a
  // structural invariant fails (dimension mismatch, |beta| out of bounds,
  // non-PSD covariance, diagonal inconsistent with sigma^2). The implied
  // correlation matrix of the mixing normals is also computed here; if it is
  // invalid the model stays usable for analytics, but joint sampling and
  // implied_epsilon_corr() throw.
  MarketModel(double alpha, double theta, Eigen::VectorXd mu, Eigen::VectorXd sigma,
              Eigen::VectorXd beta, Eigen::MatrixXd cov, std::vector<std::string> symbols = {});

  int size() const { return static_cast<int>(mu_.size()); }
  double alpha() const { return alpha_; }
  double theta() const { return theta_; }
  const Eigen::VectorXd& mu() const { return mu_; }
  const Eigen::VectorXd& sigma() const { return sigma_; }
  const Eigen::VectorXd& beta() const { return beta_; }
  const Eigen::MatrixXd& cov() const { return cov_; }
  const std::vector<std::string>& symbols() const { return symbols_; }

  double beta_bound() const;  // admissible |beta| for (alpha, theta)

  bool samplable() const { return sampling_issue_.empty(); }
  const std::string& sampling_issue() const { return sampling_issue_; }

  // Correlation matrix of the mixing normals recovered from cov; throws
  // InvalidModelError when any entry left [-1, 1] or the matrix is not PSD.
  const Eigen::MatrixXd& implied_epsilon_corr() const;

 private:
  double alpha_, theta_;
  Eigen::VectorXd mu_, sigma_, beta_;
  Eigen::MatrixXd cov_;
  std::vector<std::string> symbols_;
  Eigen::MatrixXd eps_corr_;
  std::string sampling_issue_;  // empty when joint sampling is available
};

// One-dimensional law of w'R: location mu_bar, scale sigma_bar, and the
// standardized skew parameter beta_bar of (w'R - mu_bar)/sigma_bar.
struct PortfolioProjection {
  double mu_bar;
  double sigma_bar;
  double beta_bar;
  StdNtsParams std_params(double alpha, double theta) const { return {alpha, theta, beta_bar}; }
};

// Valid for any finite w with w' cov w > 0; degenerate portfolios throw.
// Homogeneous: scaling w scales mu_bar/sigma_bar and leaves beta_bar fixed.
PortfolioProjection project_portfolio(const MarketModel& m, const Eigen::VectorXd& w);

// Risk axes used by the frontier module. Asymmetry is the plain weighted mean
// of the asset skew parameters, w'beta: linear in w, so the frontier programs
// stay quadratic, and bounded by the admissible skew band on the simplex.
// Note it differs from the projection's beta_bar, which carries sigma
// weighting and is the actual distribution parameter of w'R.
double asym_measure(const MarketModel& m, const Eigen::VectorXd& w);
double disp_measure(const MarketModel& m, const Eigen::VectorXd& w);

// n rows of joint return draws, one subordinator draw per row shared across
// assets. Requires samplable(); otherwise throws InvalidModelError.
Eigen::MatrixXd sample_market(const MarketModel& m, std::size_t n, std::uint64_t seed);

// Gaussian benchmark with the same first two moments.
struct GaussianModel {
  Eigen::VectorXd mu;
  Eigen::MatrixXd cov;
};

GaussianModel to_gaussian(const MarketModel& m);

// (mean, stddev) of w'R under the Gaussian benchmark.
std::pair<double, double> project_gaussian(const GaussianModel& g, const Eigen::VectorXd& w);

}  // namespace ntsopt
