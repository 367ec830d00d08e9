#pragma once

#include <Eigen/Dense>

#include "ntsopt/market.hpp"
#include "ntsopt/nts_dist.hpp"

namespace ntsopt {

// Tail level eta must lie in (0, 0.5]. All VaR/CVaR values follow the loss
// convention: positive numbers are losses.

// CVaR of the standardized law at level eta, via the damped-contour integral
// of the chf against the fixed quantile; and its derivative in beta (through
// both the quantile and the chf).
double cvar_stdnts(double eta, const StdNtsParams& p, const QuadratureConfig& q = {});
double cvar_stdnts_dbeta(double eta, const StdNtsParams& p, const QuadratureConfig& q = {});

// Portfolio VaR/CVaR through the one-dimensional projection. Positively
// homogeneous in w; no simplex requirement.
double var_portfolio(const MarketModel& m, const Eigen::VectorXd& w, double eta,
                     const QuadratureConfig& q = {});
double cvar_portfolio(const MarketModel& m, const Eigen::VectorXd& w, double eta,
                      const QuadratureConfig& q = {});

// Marginal contributions to tail risk: exact partial derivatives of
// var_portfolio / cvar_portfolio with respect to each raw weight (no
// renormalization). Satisfy the Euler identity sum_n w_n MCT_n = total.
Eigen::VectorXd mct_var(const MarketModel& m, const Eigen::VectorXd& w, double eta,
                        const QuadratureConfig& q = {});
Eigen::VectorXd mct_cvar(const MarketModel& m, const Eigen::VectorXd& w, double eta,
                         const QuadratureConfig& q = {});

struct RiskReport {
  double eta = 0.0;
  double var = 0.0;
  double cvar = 0.0;
  Eigen::VectorXd mct_var;
  Eigen::VectorXd mct_cvar;
};

RiskReport nts_risk_report(const MarketModel& m, const Eigen::VectorXd& w, double eta,
                           const QuadratureConfig& q = {});

// Gaussian benchmark with matched mean/covariance.
double gaussian_cvar_std(double eta);  // CVaR of N(0,1)
std::pair<double, double> gaussian_var_cvar(const GaussianModel& g, const Eigen::VectorXd& w,
                                            double eta);
Eigen::VectorXd gaussian_mct_var(const GaussianModel& g, const Eigen::VectorXd& w, double eta);
Eigen::VectorXd gaussian_mct_cvar(const GaussianModel& g, const Eigen::VectorXd& w, double eta);
RiskReport gaussian_risk_report(const GaussianModel& g, const Eigen::VectorXd& w, double eta);

}  // namespace ntsopt
