#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <doctest.h>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ntsopt/backtest.hpp"
#include "ntsopt/errors.hpp"
#include "ntsopt/frontier.hpp"
#include "ntsopt/market.hpp"
#include "ntsopt/normal.hpp"
#include "ntsopt/nts_dist.hpp"
#include "ntsopt/risk.hpp"

using namespace ntsopt;

namespace {

std::vector<std::string> make_dates(int n) {
  std::vector<std::string> dates(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "d%07d", t);
    dates[static_cast<std::size_t>(t)] = buf;
  }
  return dates;
}

// Three assets sharing one tail shape, with an expected-return gradient that
// is large relative to sampling noise so estimated strategies stay sensible.
MarketModel strong_trend_model() {
  Eigen::VectorXd mu(3);
  mu << 0.004, 0.006, 0.002;
  Eigen::VectorXd sigma(3);
  sigma << 0.010, 0.014, 0.018;
  Eigen::VectorXd beta(3);
  beta << -0.30, -0.30, -0.30;
  Eigen::MatrixXd corr(3, 3);
  corr << 1.0, 0.3, 0.2,
          0.3, 1.0, 0.25,
          0.2, 0.25, 1.0;
  Eigen::MatrixXd cov = sigma.asDiagonal() * corr * sigma.asDiagonal();
  return MarketModel(1.1, 0.8, mu, sigma, beta, cov);
}

ReturnPanel panel_from_model(const MarketModel& m, int n_days, std::uint64_t seed,
                             double mu_shift = 0.0) {
  ReturnPanel panel;
  panel.returns = sample_market(m, static_cast<std::size_t>(n_days), seed);
  panel.returns.array() += mu_shift;
  panel.assets.clear();
  for (Eigen::Index j = 0; j < m.size(); ++j) panel.assets.push_back("A" + std::to_string(j));
  panel.dates = make_dates(n_days);
  return panel;
}

std::vector<double> equal_weight_index(const ReturnPanel& panel) {
  const Eigen::VectorXd avg = panel.returns.rowwise().mean();
  return std::vector<double>(avg.data(), avg.data() + avg.size());
}

EstimateConfig cheap_estimate() {
  EstimateConfig cfg;
  cfg.starts = 2;
  cfg.grid_size = 101;
  cfg.max_evaluations = 120;
  return cfg;
}

}  // namespace

TEST_CASE("historical tail risk on a hand-checkable ladder") {
  // Returns -1.00, -0.99, ..., -0.01 presented out of order.
  std::vector<double> series;
  for (int i = 1; i <= 100; ++i) series.push_back(-i / 100.0);
  std::shuffle(series.begin(), series.end(), std::mt19937_64(7));

  auto [var1, cvar1] = historical_var_cvar(series, 0.01);
  CHECK(var1 == doctest::Approx(1.00).epsilon(1e-15));
  CHECK(cvar1 == doctest::Approx(1.00).epsilon(1e-15));

  auto [var5, cvar5] = historical_var_cvar(series, 0.05);
  CHECK(var5 == doctest::Approx(0.96).epsilon(1e-15));
  CHECK(cvar5 == doctest::Approx(0.98).epsilon(1e-15));

  // Fractional eta*n rounds the tail count up.
  auto [var3, cvar3] = historical_var_cvar(series, 0.025);  // k = ceil(2.5) = 3
  CHECK(var3 == doctest::Approx(0.98).epsilon(1e-15));
  CHECK(cvar3 == doctest::Approx(0.99).epsilon(1e-15));
}

TEST_CASE("historical estimates agree with the closed-form tail") {
  MarketModel m(1.2, 1.0, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1),
                Eigen::VectorXd::Constant(1, -0.3), Eigen::MatrixXd::Identity(1, 1));
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(1);
  const double var_true = var_portfolio(m, w, 0.01);
  const double cvar_true = cvar_portfolio(m, w, 0.01);

  const std::vector<double> draws = sample_stdnts(StdNtsParams(1.2, 1.0, -0.3), 200000, 99991);
  auto [var_hat, cvar_hat] = historical_var_cvar(draws, 0.01);
  CHECK(std::abs(var_hat - var_true) / var_true < 0.02);
  CHECK(std::abs(cvar_hat - cvar_true) / cvar_true < 0.02);
  CHECK(cvar_hat >= var_hat);
}

TEST_CASE("historical CVaR dominates VaR on random data") {
  std::mt19937_64 eng(404);
  std::normal_distribution<double> gauss(0.0, 0.02);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<double> series(400);
    for (double& x : series) x = gauss(eng);
    auto [v, c] = historical_var_cvar(series, 0.05);
    CHECK(c >= v);
  }
}

TEST_CASE("historical estimator input validation") {
  std::vector<double> tiny(50, 0.01);
  CHECK_THROWS_AS(historical_var_cvar(tiny, 0.01), std::invalid_argument);  // eta*n < 1
  std::vector<double> ok(400, 0.01);
  CHECK_THROWS_AS(historical_var_cvar(ok, 0.7), std::invalid_argument);
  CHECK_THROWS_AS(historical_var_cvar(ok, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(historical_var_cvar({}, 0.05), std::invalid_argument);
}

TEST_CASE("fixed weights pass straight through") {
  const ReturnPanel panel = panel_from_model(strong_trend_model(), 300, 2718);
  const std::vector<double> index = equal_weight_index(panel);

  BacktestConfig cfg;
  cfg.window = 250;
  cfg.rebalance_every = 10;
  cfg.strategy = Strategy::FixedWeights;
  cfg.fixed_weights = Eigen::Vector3d(0.2, 0.3, 0.5);

  const BacktestResult res = rolling_backtest(panel, index, cfg);
  REQUIRE(res.returns.size() == 50);
  REQUIRE(res.dates.size() == 50);
  CHECK(res.warnings.empty());

  REQUIRE(res.rebalance_dates.size() == 5);
  CHECK(res.rebalance_dates.front() == panel.dates[250]);
  CHECK(res.rebalance_dates.back() == panel.dates[290]);
  REQUIRE(res.weight_history.rows() == 5);
  for (Eigen::Index r = 0; r < res.weight_history.rows(); ++r)
    CHECK((res.weight_history.row(r).transpose() - cfg.fixed_weights).norm() == 0.0);

  for (int i = 0; i < 50; ++i) {
    CHECK(res.dates[static_cast<std::size_t>(i)] == panel.dates[static_cast<std::size_t>(250 + i)]);
    const double want = cfg.fixed_weights.dot(panel.returns.row(250 + i));
    CHECK(res.returns[static_cast<std::size_t>(i)] == want);
  }
}

TEST_CASE("decisions never peek past the rebalance date") {
  const ReturnPanel base = panel_from_model(strong_trend_model(), 320, 13);
  const std::vector<double> index_a = equal_weight_index(base);

  // Corrupt everything strictly after day 280: fits at 250..280 and returns
  // through day 280 must be unaffected if the walk-forward loop is honest.
  ReturnPanel tampered = base;
  for (int t = 281; t < 320; ++t) tampered.returns.row(t).array() = 0.05 * ((t % 3) - 1.0);
  std::vector<double> index_b = index_a;
  for (int t = 281; t < 320; ++t)
    index_b[static_cast<std::size_t>(t)] = tampered.returns.row(t).mean();

  BacktestConfig cfg;
  cfg.window = 250;
  cfg.rebalance_every = 10;
  cfg.strategy = Strategy::SharpeMax;
  cfg.estimate = cheap_estimate();

  const BacktestResult ra = rolling_backtest(base, index_a, cfg);
  const BacktestResult rb = rolling_backtest(tampered, index_b, cfg);
  REQUIRE(ra.returns.size() == 70);
  REQUIRE(rb.returns.size() == 70);
  for (int i = 0; i <= 30; ++i)  // days 250..280 inclusive
    CHECK(ra.returns[static_cast<std::size_t>(i)] == rb.returns[static_cast<std::size_t>(i)]);
  // Whereas the corrupted tail must actually change something later on.
  bool diverged = false;
  for (int i = 31; i < 70; ++i)
    diverged = diverged || ra.returns[static_cast<std::size_t>(i)] != rb.returns[static_cast<std::size_t>(i)];
  CHECK(diverged);
}

TEST_CASE("repeat runs are bitwise identical") {
  const ReturnPanel panel = panel_from_model(strong_trend_model(), 270, 555);
  const std::vector<double> index = equal_weight_index(panel);
  BacktestConfig cfg;
  cfg.window = 250;
  cfg.rebalance_every = 10;
  cfg.strategy = Strategy::SharpeMax;
  cfg.estimate = cheap_estimate();

  const BacktestResult r1 = rolling_backtest(panel, index, cfg);
  const BacktestResult r2 = rolling_backtest(panel, index, cfg);
  REQUIRE(r1.returns.size() == r2.returns.size());
  for (std::size_t i = 0; i < r1.returns.size(); ++i) CHECK(r1.returns[i] == r2.returns[i]);
  REQUIRE(r1.weight_history.rows() == r2.weight_history.rows());
  CHECK((r1.weight_history - r2.weight_history).norm() == 0.0);
}

TEST_CASE("hopeless markets fall back to equal weights with warnings") {
  // Every asset loses money on average, so the max-Sharpe solve has no
  // portfolio above the risk-free rate and must throw internally.
  const ReturnPanel panel = panel_from_model(strong_trend_model(), 280, 77, -0.012);
  const std::vector<double> index = equal_weight_index(panel);

  BacktestConfig cfg;
  cfg.window = 250;
  cfg.rebalance_every = 10;
  cfg.strategy = Strategy::SharpeMax;
  cfg.estimate = cheap_estimate();

  const BacktestResult res = rolling_backtest(panel, index, cfg);
  REQUIRE(!res.warnings.empty());
  CHECK(res.warnings.front().find(panel.dates[250]) != std::string::npos);
  CHECK(res.warnings.front().find("equal weights") != std::string::npos);

  const Eigen::VectorXd ew = Eigen::VectorXd::Constant(3, 1.0 / 3.0);
  for (int i = 0; i < 30; ++i) {
    const double want = ew.dot(panel.returns.row(250 + i));
    CHECK(res.returns[static_cast<std::size_t>(i)] == doctest::Approx(want).epsilon(1e-15));
  }
  for (Eigen::Index r = 0; r < res.weight_history.rows(); ++r)
    CHECK((res.weight_history.row(r).transpose() - ew).lpNorm<Eigen::Infinity>() < 1e-15);
}

TEST_CASE("estimated strategies recover most of the attainable Sharpe") {
  const MarketModel truth = strong_trend_model();
  const ReturnPanel panel = panel_from_model(truth, 500, 8086);
  const std::vector<double> index = equal_weight_index(panel);

  const Eigen::VectorXd w_opt = sharpe_max_portfolio(truth, 0.0);
  const double sharpe_opt =
      truth.mu().dot(w_opt) / std::sqrt(w_opt.dot(truth.cov() * w_opt));
  const double se = std::sqrt((1.0 + 0.5 * sharpe_opt * sharpe_opt) / 250.0);

  for (const Strategy strat : {Strategy::SharpeMax, Strategy::AsRatioMax}) {
    CAPTURE(static_cast<int>(strat));
    BacktestConfig cfg;
    cfg.window = 250;
    cfg.rebalance_every = 50;
    cfg.strategy = strat;
    cfg.estimate = cheap_estimate();

    const BacktestResult res = rolling_backtest(panel, index, cfg);
    REQUIRE(res.returns.size() == 250);
    CHECK(res.warnings.empty());

    const PerfReport rep = perf_report(res.returns, 0.05, 0.0, cheap_estimate());
    CHECK(rep.sharpe > sharpe_opt - 3.0 * se);
    CHECK(rep.sharpe < sharpe_opt + 3.0 * se);
  }
}

TEST_CASE("backtest configuration validation") {
  const ReturnPanel panel = panel_from_model(strong_trend_model(), 300, 2718);
  const std::vector<double> index = equal_weight_index(panel);

  BacktestConfig cfg;
  cfg.window = 100;  // too short to fit anything trustworthy
  CHECK_THROWS_AS(rolling_backtest(panel, index, cfg), std::invalid_argument);

  cfg = BacktestConfig{};
  cfg.window = 250;
  cfg.rebalance_every = 0;
  CHECK_THROWS_AS(rolling_backtest(panel, index, cfg), std::invalid_argument);

  cfg = BacktestConfig{};
  cfg.window = 250;
  cfg.strategy = Strategy::FixedWeights;
  cfg.fixed_weights = Eigen::Vector2d(0.5, 0.5);  // wrong width
  CHECK_THROWS_AS(rolling_backtest(panel, index, cfg), std::invalid_argument);
  cfg.fixed_weights = Eigen::Vector3d(0.5, 0.4, 0.4);  // off the simplex
  CHECK_THROWS_AS(rolling_backtest(panel, index, cfg), std::invalid_argument);

  cfg = BacktestConfig{};
  cfg.window = 250;
  std::vector<double> short_index(index.begin(), index.end() - 5);
  CHECK_THROWS_AS(rolling_backtest(panel, short_index, cfg), std::invalid_argument);

  // Panel shorter than one window plus one rebalance block.
  const ReturnPanel tiny = panel_from_model(strong_trend_model(), 255, 1);
  cfg = BacktestConfig{};
  cfg.window = 250;
  cfg.rebalance_every = 10;
  CHECK_THROWS_AS(rolling_backtest(tiny, equal_weight_index(tiny), cfg), std::invalid_argument);
}

TEST_CASE("performance report on white noise") {
  std::mt19937_64 eng(90210);
  std::normal_distribution<double> gauss(0.0, 0.01);
  std::vector<double> series(5000);
  for (double& x : series) x = gauss(eng);

  EstimateConfig cfg = cheap_estimate();
  cfg.starts = 3;
  const PerfReport rep = perf_report(series, 0.05, 0.0, cfg);

  CHECK(std::abs(rep.mean) < 3.0 * 0.01 / std::sqrt(5000.0));
  CHECK(rep.stddev == doctest::Approx(0.01).epsilon(0.05));
  CHECK(std::abs(rep.sharpe) < 3.0 / std::sqrt(5000.0));
  CHECK(rep.hist_cvar >= rep.hist_var);

  // On Gaussian data the shape parameters are weakly identified (beta can
  // drift when theta is large), but the fitted law itself must stay close to
  // the standard normal.
  const StdNtsParams fitted(rep.alpha, rep.theta, rep.beta);
  for (const double x : {-1.5, 0.0, 1.5})
    CHECK(std::abs(stdnts_cdf(x, fitted) - normal_cdf(x)) < 0.03);

  // Ratio identities rather than magnitudes: these must hold exactly.
  CHECK(rep.var_ratio == doctest::Approx(rep.mean / rep.hist_var).epsilon(1e-12));
  CHECK(rep.cvar_ratio == doctest::Approx(rep.mean / rep.hist_cvar).epsilon(1e-12));
  const double a = as_score(rep.beta, rep.alpha, rep.theta);
  CHECK(rep.as_ratio_of_fit == doctest::Approx(rep.sharpe / a).epsilon(1e-12));
}

TEST_CASE("performance report input validation") {
  std::vector<double> flat(400, 0.01);
  CHECK_THROWS_AS(perf_report(flat, 0.05, 0.0), std::invalid_argument);  // zero variance
  std::vector<double> short_series(100, 0.0);
  CHECK_THROWS_AS(perf_report(short_series, 0.05, 0.0), std::invalid_argument);
}
