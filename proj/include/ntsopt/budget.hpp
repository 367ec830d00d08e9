#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "ntsopt/estimate.hpp"
#include "ntsopt/market.hpp"
#include "ntsopt/quadrature.hpp"

namespace ntsopt {

enum class RiskMeasure { VaR, CVaR };

// Which model's marginal contributions steer the reallocation. Trajectories
// are always scored under the NTS model (and optionally a return panel), so
// the two drivers can be compared on equal footing.
enum class BudgetDriver { Nts, Gaussian };

// One local reallocation step: the exact optimum of the linearized risk
// change c'delta over the box |delta_n| <= d, clipped so w + delta stays
// nonnegative, with sum(delta) = 0 and mu'delta >= 0.
struct BudgetStep {
  Eigen::VectorXd delta_w;
  double predicted_change = 0.0;  // c'delta, <= 0 by construction
  RiskMeasure measure = RiskMeasure::CVaR;
  double box_radius = 0.0;
};

// Among the optimal vertices the minimum-norm point is returned, so a
// constant c yields exactly delta = 0. d = 0 short-circuits to a zero step.
BudgetStep local_risk_budget(const Eigen::VectorXd& c, const Eigen::VectorXd& mu, double d,
                             const Eigen::VectorXd& w, RiskMeasure measure = RiskMeasure::CVaR);

struct BudgetIteration {
  Eigen::VectorXd w;
  double var_model = 0.0;   // NTS portfolio VaR, regardless of driver
  double cvar_model = 0.0;  // NTS portfolio CVaR, regardless of driver
  double var_hist = std::numeric_limits<double>::quiet_NaN();
  double cvar_hist = std::numeric_limits<double>::quiet_NaN();
};

struct BudgetTrajectory {
  RiskMeasure measure = RiskMeasure::CVaR;
  BudgetDriver driver = BudgetDriver::Nts;
  double box_radius = 0.0;
  double eta = 0.0;
  std::vector<BudgetIteration> iterations;  // M + 1 rows, starting state first
};

// Repeated local steps w <- w + delta using the chosen measure's marginal
// contributions under the chosen driver. Historical VaR/CVaR columns are
// filled when a return panel is supplied. Risk engine failures are rethrown
// with the iteration index attached.
BudgetTrajectory iterative_budget(const MarketModel& m, const Eigen::VectorXd& w0, double d,
                                  double eta, int steps, RiskMeasure measure,
                                  BudgetDriver driver = BudgetDriver::Nts,
                                  const std::optional<ReturnPanel>& panel = std::nullopt,
                                  const QuadratureConfig& q = {});

}  // namespace ntsopt
