#include "ntsopt/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ntsopt/errors.hpp"
#include "ntsopt/frontier.hpp"

namespace ntsopt {

std::pair<double, double> historical_var_cvar(const std::vector<double>& series, double eta) {
  if (!(eta > 0.0 && eta <= 0.5))
    throw std::invalid_argument("historical_var_cvar: eta must lie in (0, 0.5]");
  const std::size_t n = series.size();
  if (static_cast<double>(n) * eta < 1.0)
    throw std::invalid_argument("historical_var_cvar: need at least 1/eta observations");
  std::vector<double> sorted(series);
  std::sort(sorted.begin(), sorted.end());
  const std::size_t k = static_cast<std::size_t>(std::ceil(eta * static_cast<double>(n)));
  const double var = -sorted[k - 1];
  const double cvar =
      -std::accumulate(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), 0.0) /
      static_cast<double>(k);
  return {var, cvar};
}

void BacktestConfig::validate(int n_assets) const {
  if (window < 250) throw std::invalid_argument("backtest: window must be at least 250 days");
  if (rebalance_every < 1) throw std::invalid_argument("backtest: rebalance_every must be >= 1");
  if (!(eta > 0.0 && eta <= 0.5)) throw std::invalid_argument("backtest: eta must lie in (0, 0.5]");
  if (!std::isfinite(r_f)) throw std::invalid_argument("backtest: r_f must be finite");
  if (strategy == Strategy::FixedWeights) {
    if (fixed_weights.size() != n_assets)
      throw std::invalid_argument("backtest: fixed_weights dimension does not match the panel");
    if (std::abs(fixed_weights.sum() - 1.0) > 1e-8 || fixed_weights.minCoeff() < -1e-10)
      throw std::invalid_argument("backtest: fixed_weights must lie on the simplex");
  }
}

BacktestResult rolling_backtest(const ReturnPanel& panel, const std::vector<double>& index,
                                const BacktestConfig& cfg) {
  panel.validate();
  const int n_days = static_cast<int>(panel.returns.rows());
  const int n_assets = static_cast<int>(panel.returns.cols());
  cfg.validate(n_assets);
  if (index.size() != static_cast<std::size_t>(n_days))
    throw std::invalid_argument("rolling_backtest: index length does not match the panel");
  if (n_days <= cfg.window + cfg.rebalance_every)
    throw std::invalid_argument("rolling_backtest: panel shorter than window + rebalance block");

  BacktestResult out;
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n_assets, 1.0 / n_assets);
  bool have_weights = false;
  std::vector<Eigen::VectorXd> history;

  for (int t = cfg.window; t < n_days; ++t) {
    const bool rebalance = (t - cfg.window) % cfg.rebalance_every == 0;
    if (rebalance) {
      if (cfg.strategy == Strategy::FixedWeights) {
        w = cfg.fixed_weights;
        have_weights = true;
      } else {
        try {
          // Fit strictly on [t - window, t): nothing from the holding block.
          ReturnPanel window_panel;
          window_panel.assets = panel.assets;
          window_panel.dates.assign(panel.dates.begin() + (t - cfg.window),
                                    panel.dates.begin() + t);
          window_panel.returns = panel.returns.middleRows(t - cfg.window, cfg.window);
          const std::vector<double> window_index(index.begin() + (t - cfg.window),
                                                 index.begin() + t);
          const TwoStepFit fit = two_step_fit(window_panel, window_index, cfg.estimate);
          w = (cfg.strategy == Strategy::AsRatioMax)
                  ? maximize_as_ratio(fit.model, cfg.r_f).w
                  : sharpe_max_portfolio(fit.model, cfg.r_f);
          have_weights = true;
        } catch (const std::exception& e) {
          // Hold what we have (equal weights if nothing yet) and keep going.
          out.warnings.push_back(panel.dates[static_cast<std::size_t>(t)] + ": " + e.what() +
                                 (have_weights ? " (holding previous weights)"
                                               : " (falling back to equal weights)"));
        }
      }
      out.rebalance_dates.push_back(panel.dates[static_cast<std::size_t>(t)]);
      history.push_back(w);
    }
    out.dates.push_back(panel.dates[static_cast<std::size_t>(t)]);
    out.returns.push_back(w.dot(panel.returns.row(t)));
  }

  out.weight_history.resize(static_cast<Eigen::Index>(history.size()), n_assets);
  for (std::size_t r = 0; r < history.size(); ++r)
    out.weight_history.row(static_cast<Eigen::Index>(r)) = history[r].transpose();
  return out;
}

PerfReport perf_report(const std::vector<double>& series, double eta, double r_f,
                       const EstimateConfig& cfg) {
  if (series.size() < 250)
    throw std::invalid_argument("perf_report: need at least 250 observations");
  const StandardizeResult st = standardize(series);
  const FullFit fit = fit_stdnts_full(smoothed_ecdf(st.residuals, cfg.bandwidth, cfg.grid_size), cfg);
  const auto [hist_var, hist_cvar] = historical_var_cvar(series, eta);

  PerfReport r;
  r.mean = st.mean;
  r.stddev = st.stddev;
  r.alpha = fit.params.alpha;
  r.theta = fit.params.theta;
  r.beta = fit.params.beta;
  r.hist_var = hist_var;
  r.hist_cvar = hist_cvar;
  r.sharpe = (st.mean - r_f) / st.stddev;
  r.var_ratio = (st.mean - r_f) / hist_var;
  r.cvar_ratio = (st.mean - r_f) / hist_cvar;
  r.as_ratio_of_fit = r.sharpe / as_score(fit.params.beta, fit.params.alpha, fit.params.theta);
  return r;
}

}  // namespace ntsopt
