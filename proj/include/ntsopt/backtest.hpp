#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "ntsopt/estimate.hpp"

namespace ntsopt {

// Empirical lower-tail risk, losses positive: with k = ceil(eta * n), VaR is
// the negated k-th ascending order statistic and CVaR the negated mean of the
// k smallest returns. Requires n >= 1/eta so the tail is nonempty.
std::pair<double, double> historical_var_cvar(const std::vector<double>& series, double eta);

enum class Strategy { AsRatioMax, SharpeMax, FixedWeights };

struct BacktestConfig {
  int window = 750;        // trailing fit span, trading days
  int rebalance_every = 10;
  double eta = 0.01;
  double r_f = 0.0;
  Strategy strategy = Strategy::AsRatioMax;
  Eigen::VectorXd fixed_weights;  // only read for Strategy::FixedWeights
  EstimateConfig estimate{};

  void validate(int n_assets) const;
};

struct BacktestResult {
  std::vector<std::string> dates;  // trading days after the initial window
  std::vector<double> returns;     // daily strategy returns w'R
  std::vector<std::string> rebalance_dates;
  Eigen::MatrixXd weight_history;  // one row per rebalance date
  std::vector<std::string> warnings;  // failed fits/solves, date-stamped
};

// Walk-forward evaluation: at every rebalance date fit the market model on
// the trailing window (strictly past data), solve the configured strategy,
// and hold the weights for the next block. A failed solve keeps the previous
// weights (equal weights if there are none yet) and logs a warning rather
// than aborting the run.
BacktestResult rolling_backtest(const ReturnPanel& panel, const std::vector<double>& index,
                                const BacktestConfig& cfg);

// Summary statistics of a strategy return series: sample moments, a
// standardized-NTS fit of its shape, historical tail risk, and the
// Sharpe-style ratios (excess mean over stddev / VaR / CVaR, and Sharpe
// scaled by the asymmetry score of the fitted skew).
struct PerfReport {
  double mean = 0.0;
  double stddev = 0.0;
  double alpha = 0.0;
  double theta = 0.0;
  double beta = 0.0;
  double hist_var = 0.0;
  double hist_cvar = 0.0;
  double sharpe = 0.0;
  double var_ratio = 0.0;
  double cvar_ratio = 0.0;
  double as_ratio_of_fit = 0.0;
};

PerfReport perf_report(const std::vector<double>& series, double eta, double r_f,
                       const EstimateConfig& cfg = {});

}  // namespace ntsopt
