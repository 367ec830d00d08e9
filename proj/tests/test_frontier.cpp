#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <doctest.h>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ntsopt/errors.hpp"
#include "ntsopt/frontier.hpp"
#include "ntsopt/market.hpp"

using namespace ntsopt;

namespace {

// Three assets with a genuine reward/dispersion/asymmetry trade-off.
MarketModel trade_off_model() {
  Eigen::VectorXd mu(3), sigma(3), beta(3);
  mu << 0.02, 0.06, 0.10;
  sigma << 0.10, 0.16, 0.25;
  beta << -0.60, 0.10, 0.45;
  Eigen::MatrixXd corr(3, 3);
  corr << 1.0, 0.3, 0.1, 0.3, 1.0, 0.4, 0.1, 0.4, 1.0;
  Eigen::MatrixXd cov = sigma.asDiagonal() * corr * sigma.asDiagonal();
  return MarketModel(1.2, 1.0, mu, sigma, beta, cov);
}

MarketModel five_asset_model() {
  Eigen::VectorXd mu(5), sigma(5), beta(5);
  mu << 0.03, 0.05, 0.07, 0.04, 0.09;
  sigma << 0.12, 0.15, 0.20, 0.10, 0.28;
  beta << -0.60, -0.20, 0.10, 0.30, 0.55;
  Eigen::MatrixXd corr(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) corr(i, j) = std::pow(0.3, std::abs(i - j));
  Eigen::MatrixXd cov = sigma.asDiagonal() * corr * sigma.asDiagonal();
  return MarketModel(1.2, 1.0, mu, sigma, beta, cov);
}

// All weight vectors on the 3-simplex with the given step.
std::vector<Eigen::Vector3d> simplex_grid(double step) {
  std::vector<Eigen::Vector3d> grid;
  const int k = static_cast<int>(std::lround(1.0 / step));
  for (int i = 0; i <= k; ++i)
    for (int j = 0; j + i <= k; ++j)
      grid.emplace_back(static_cast<double>(i) / k, static_cast<double>(j) / k,
                        static_cast<double>(k - i - j) / k);
  return grid;
}

}  // namespace

TEST_CASE("slack constraints on an identity covariance give equal weights") {
  Eigen::VectorXd mu(3), sigma(3), beta(3);
  mu << 0.02, 0.05, 0.08;
  beta << -0.3, 0.0, 0.4;
  const double s = 0.2;
  sigma = Eigen::VectorXd::Constant(3, s);
  const MarketModel m(1.2, 1.0, mu, sigma, beta, s * s * Eigen::MatrixXd::Identity(3, 3));

  const FrontierPoint p = min_disp_portfolio(m, beta.minCoeff(), mu.minCoeff());
  REQUIRE(p.feasible);
  for (int i = 0; i < 3; ++i) CHECK(p.w[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(p.disp == doctest::Approx(s / std::sqrt(3.0)).epsilon(1e-10));
  CHECK(p.kkt_residual < 1e-8);
}

TEST_CASE("infeasible programs are flagged, not thrown") {
  const MarketModel m = trade_off_model();
  const FrontierPoint too_rich = min_disp_portfolio(m, -1.0, 0.2);  // m* > max mu
  CHECK_FALSE(too_rich.feasible);
  CHECK(too_rich.w.size() == 0);
  CHECK(std::isnan(too_rich.disp));

  const FrontierPoint too_skewed = min_disp_portfolio(m, 0.6, 0.0);  // b* > max beta
  CHECK_FALSE(too_skewed.feasible);
}

TEST_CASE("minimum dispersion matches a fine simplex grid search") {
  const MarketModel m = trade_off_model();
  // 0.002 steps: near max beta the feasible region is a sliver, and a coarser
  // grid's own discretization error would dominate the comparison.
  const std::vector<Eigen::Vector3d> grid = simplex_grid(0.002);

  // Mix of slack, one-sided and two-sided binding benchmark pairs.
  const std::vector<std::pair<double, double>> cases = {
      {-0.60, 0.02}, {-0.10, 0.05}, {0.20, 0.07}, {0.05, 0.09}, {0.40, 0.03}};
  for (const auto& [b_star, m_star] : cases) {
    CAPTURE(b_star);
    CAPTURE(m_star);
    const FrontierPoint p = min_disp_portfolio(m, b_star, m_star);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& w : grid) {
      if (w.dot(m.beta()) < b_star - 1e-12 || w.dot(m.mu()) < m_star - 1e-12) continue;
      best = std::min(best, std::sqrt(w.dot(m.cov() * w)));
    }
    REQUIRE(p.feasible);
    CHECK(p.kkt_residual < 1e-8);
    CHECK(p.disp <= best + 1e-12);       // optimizer at least as good as the grid
    CHECK(std::abs(p.disp - best) < 2e-4);  // and the grid brackets it tightly
    // Feasibility of the reported point.
    CHECK(p.w.sum() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(p.w.minCoeff() > -1e-9);
    CHECK(p.asym >= b_star - 1e-9);
    CHECK(p.reward >= m_star - 1e-9);
  }
}

TEST_CASE("surface grids, feasibility pattern, and monotonicity") {
  const MarketModel m = trade_off_model();
  const FrontierSurface s = frontier_surface(m, 21, 21);
  CHECK(s.errors.empty());
  REQUIRE(s.b_grid.size() == 21);
  REQUIRE(s.m_grid.size() == 21);
  CHECK(s.b_grid.front() == doctest::Approx(m.beta().minCoeff()));
  CHECK(s.b_grid.back() == doctest::Approx(m.beta().maxCoeff()));
  CHECK(s.m_grid.front() == doctest::Approx(m.mu().minCoeff()));
  CHECK(s.m_grid.back() == doctest::Approx(m.mu().maxCoeff()));
  // Equal spacing.
  for (std::size_t k = 1; k < s.b_grid.size(); ++k)
    CHECK(s.b_grid[k] - s.b_grid[k - 1] ==
          doctest::Approx((s.b_grid.back() - s.b_grid.front()) / 20.0).epsilon(1e-12));

  // The weakest-constraint corner is feasible.
  CHECK(s.points[0][0].feasible);

  int feasible_count = 0;
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    double prev_disp = -1.0;
    bool seen_infeasible = false;
    for (std::size_t j = 0; j < s.points[i].size(); ++j) {
      const FrontierPoint& p = s.points[i][j];
      if (!p.feasible) {
        seen_infeasible = true;
        continue;
      }
      // Feasible set shrinks with m*, so no feasible cell after an infeasible one.
      CHECK_FALSE(seen_infeasible);
      ++feasible_count;
      CHECK(p.kkt_residual < 1e-8);
      CHECK(p.disp >= prev_disp - 1e-9);  // nondecreasing along m* at fixed b*
      prev_disp = p.disp;
    }
  }
  // Same monotonicity along b* at fixed m*.
  for (std::size_t j = 0; j < s.m_grid.size(); ++j) {
    double prev_disp = -1.0;
    for (std::size_t i = 0; i < s.b_grid.size(); ++i) {
      const FrontierPoint& p = s.points[i][j];
      if (!p.feasible) continue;
      CHECK(p.disp >= prev_disp - 1e-9);
      prev_disp = p.disp;
    }
  }
  CHECK(feasible_count > 200);  // the program is feasible on a large region

  CHECK_THROWS_AS(frontier_surface(m, 1, 21), std::invalid_argument);
}

TEST_CASE("iso-dispersion slices trade reward against asymmetry") {
  // Fig.-3-style property: at a fixed dispersion budget, the best achievable
  // reward falls (weakly) as the asymmetry floor rises. The best reward at
  // dispersion cap D is found by bisecting the monotone map m* -> min disp.
  Eigen::VectorXd mu(3), sigma(3), beta(3);
  mu << 0.02, 0.06, 0.10;
  sigma << 0.10, 0.16, 0.25;
  beta << -0.60, -0.30, -0.05;  // left-skewed market
  Eigen::MatrixXd corr(3, 3);
  corr << 1.0, 0.3, 0.1, 0.3, 1.0, 0.4, 0.1, 0.4, 1.0;
  Eigen::MatrixXd cov = sigma.asDiagonal() * corr * sigma.asDiagonal();
  const MarketModel m(1.2, 1.0, mu, sigma, beta, cov);

  const auto max_reward_at_disp = [&](double b, double cap) {
    double lo = mu.minCoeff(), hi = mu.maxCoeff();
    const FrontierPoint base = min_disp_portfolio(m, b, lo);
    if (!base.feasible || base.disp > cap) return std::numeric_limits<double>::quiet_NaN();
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      const FrontierPoint p = min_disp_portfolio(m, b, mid);
      if (p.feasible && p.disp <= cap)
        lo = mid;
      else
        hi = mid;
    }
    return lo;
  };

  for (double cap : {0.11, 0.13, 0.16}) {
    CAPTURE(cap);
    double prev = std::numeric_limits<double>::infinity();
    int seen = 0;
    for (int k = 0; k <= 8; ++k) {
      const double b = beta.minCoeff() + k * (beta.maxCoeff() - beta.minCoeff()) / 8.0;
      const double reward = max_reward_at_disp(b, cap);
      if (std::isnan(reward)) continue;  // cap unreachable at this floor
      CHECK(reward <= prev + 1e-7);
      prev = reward;
      ++seen;
    }
    CHECK(seen >= 4);
  }
}

TEST_CASE("tangency: symmetric two-asset case is an even split") {
  Eigen::VectorXd mu(2), sigma(2), beta(2);
  const double r_f = 0.01;
  mu << r_f + 0.01, r_f + 0.01;
  sigma << 0.2, 0.2;
  beta << -0.1, 0.1;
  const MarketModel m(1.2, 1.0, mu, sigma, beta, 0.04 * Eigen::MatrixXd::Identity(2, 2));
  const Eigen::VectorXd w = tangency_portfolio(m, r_f, -0.1);
  CHECK(w[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(w[1] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("tangency matches brute-force Sharpe maximization on a grid") {
  const MarketModel m = trade_off_model();
  const double r_f = 0.01;
  for (double b : {-0.60, 0.0, 0.30}) {
    CAPTURE(b);
    const Eigen::VectorXd w = tangency_portfolio(m, r_f, b);
    const double sharpe = (w.dot(m.mu()) - r_f) / std::sqrt(w.dot(m.cov() * w));
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& g : simplex_grid(0.01)) {
      if (g.dot(m.beta()) < b - 1e-12) continue;
      best = std::max(best, (g.dot(m.mu()) - r_f) / std::sqrt(g.dot(m.cov() * g)));
    }
    CHECK(sharpe >= best - 1e-9);
    CHECK(std::abs(sharpe - best) < 1e-3);
    CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(w.minCoeff() > -1e-9);
    CHECK(w.dot(m.beta()) >= b - 1e-9);
  }
}

TEST_CASE("a binding asymmetry floor holds with equality") {
  const MarketModel m = trade_off_model();
  const double r_f = 0.01;
  const Eigen::VectorXd free_w = sharpe_max_portfolio(m, r_f);
  const double free_asym = free_w.dot(m.beta());
  const double b_bind = 0.5 * (free_asym + m.beta().maxCoeff());
  REQUIRE(b_bind > free_asym);  // floor above the unconstrained optimum
  const Eigen::VectorXd w = tangency_portfolio(m, r_f, b_bind);
  CHECK(w.dot(m.beta()) == doctest::Approx(b_bind).epsilon(1e-8));
  // Constrained Sharpe cannot beat the unconstrained one.
  const double sharpe_free = (free_w.dot(m.mu()) - r_f) / std::sqrt(free_w.dot(m.cov() * free_w));
  const double sharpe_bind = (w.dot(m.mu()) - r_f) / std::sqrt(w.dot(m.cov() * w));
  CHECK(sharpe_bind <= sharpe_free + 1e-10);
}

TEST_CASE("tangency is invariant to admissible rescalings") {
  const MarketModel m = trade_off_model();
  const double r_f = 0.01;
  const double c = 3.7;  // covariance scale
  const double d = 0.25; // excess-return scale
  const Eigen::VectorXd mu2 =
      Eigen::VectorXd::Constant(3, r_f) + d * (m.mu() - Eigen::VectorXd::Constant(3, r_f));
  const MarketModel m2(m.alpha(), m.theta(), mu2, (std::sqrt(c) * m.sigma()).eval(), m.beta(),
                       (c * m.cov()).eval());
  for (double b : {-0.60, 0.25}) {
    const Eigen::VectorXd w1 = tangency_portfolio(m, r_f, b);
    const Eigen::VectorXd w2 = tangency_portfolio(m2, r_f, b);
    CHECK((w1 - w2).lpNorm<Eigen::Infinity>() < 1e-8);
  }
}

TEST_CASE("tangency error channels") {
  Eigen::VectorXd mu(2), sigma(2), beta(2);
  mu << 0.005, 0.002;  // both below r_f
  sigma << 0.2, 0.2;
  beta << -0.1, 0.1;
  const MarketModel poor(1.2, 1.0, mu, sigma, beta, 0.04 * Eigen::MatrixXd::Identity(2, 2));
  CHECK_THROWS_AS(tangency_portfolio(poor, 0.01, -0.1), std::domain_error);

  // The max-beta asset is the only route to high asymmetry but earns less
  // than r_f, so a high floor leaves no positive-excess portfolio.
  Eigen::VectorXd mu2(2);
  mu2 << 0.05, 0.002;
  const MarketModel skew_poor(1.2, 1.0, mu2, sigma, beta, 0.04 * Eigen::MatrixXd::Identity(2, 2));
  CHECK_THROWS_AS(tangency_portfolio(skew_poor, 0.01, 0.09), std::domain_error);
  CHECK_NOTHROW(tangency_portfolio(skew_poor, 0.01, -0.05));
}

TEST_CASE("asymmetry score: frozen values and exact affinity") {
  // alpha = 1.2, theta = 1: bound = sqrt(2.5).
  const double bound = std::sqrt(2.5);
  CHECK(as_score(-0.5, 1.2, 1.0) == doctest::Approx(0.6581138830084190).epsilon(1e-12));
  CHECK(as_score(0.5, 1.2, 1.0) == doctest::Approx(0.3418861169915810).epsilon(1e-12));
  CHECK(as_score(0.0, 1.2, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(as_score(-bound, 1.2, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(as_score(bound, 1.2, 1.0) == doctest::Approx(0.0).epsilon(1e-12));

  // A(b1) - A(b2) = (b2 - b1) / (2 bound) exactly.
  const double lhs = as_score(-0.73, 1.2, 1.0) - as_score(0.41, 1.2, 1.0);
  CHECK(lhs == doctest::Approx((0.41 + 0.73) / (2.0 * bound)).epsilon(1e-14));

  CHECK_THROWS_AS(as_score(1.37 * bound, 1.2, 1.0), std::domain_error);
  CHECK_THROWS_AS(as_score(-1.37 * bound, 1.2, 1.0), std::domain_error);
}

TEST_CASE("AS ratio reduces to Sharpe at unit score and grows with b on the plateau") {
  const MarketModel m = trade_off_model();
  const double r_f = 0.01;
  const double bound = std::sqrt(2.5);

  // At b = -bound the score is exactly 1 and the floor cannot bind.
  const Eigen::VectorXd w = sharpe_max_portfolio(m, r_f);
  const double sharpe = (w.dot(m.mu()) - r_f) / std::sqrt(w.dot(m.cov() * w));
  CHECK(as_ratio(m, -bound, r_f) == doctest::Approx(sharpe).epsilon(1e-10));

  // While the floor stays slack the tangency (hence Sharpe) is unchanged, so
  // the ratio must rise as A(b) falls.
  const double b1 = -1.2, b2 = m.beta().minCoeff();
  REQUIRE(b2 > b1);
  CHECK(as_ratio(m, b2, r_f) > as_ratio(m, b1, r_f));
}

TEST_CASE("AS ratio curve bookkeeping") {
  const MarketModel m = trade_off_model();
  const AsRatioCurve c = as_ratio_curve(m, 0.01, 21);
  REQUIRE(c.b.size() == 21);
  for (std::size_t k = 0; k < c.b.size(); ++k) {
    REQUIRE(c.feasible[k]);  // every asset here beats r_f, so all slices solve
    CHECK(c.a_score[k] >= 0.0);
    CHECK(c.a_score[k] <= 1.0);
    CHECK(c.as_value[k] == doctest::Approx(c.sharpe[k] / c.a_score[k]).epsilon(1e-12));
    CHECK(c.w[k].sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(c.w[k].dot(m.beta()) >= c.b[k] - 1e-9);
  }
}

TEST_CASE("AS ratio maximization agrees with a dense scan") {
  const MarketModel m = five_asset_model();
  const double r_f = 0.02;
  const AsRatioMax best = maximize_as_ratio(m, r_f);

  const AsRatioCurve dense = as_ratio_curve(m, r_f, 501);
  double dense_best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < dense.b.size(); ++k)
    if (dense.feasible[k]) dense_best = std::max(dense_best, dense.as_value[k]);

  CHECK(best.value >= dense_best - 1e-9);  // refinement never loses to a scan
  CHECK(std::abs(best.value - dense_best) < 1e-3);

  // Coarse-scan contract: never below the 51-point scan's best.
  const AsRatioCurve coarse = as_ratio_curve(m, r_f, 51);
  double coarse_best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < coarse.b.size(); ++k)
    if (coarse.feasible[k]) coarse_best = std::max(coarse_best, coarse.as_value[k]);
  CHECK(best.value >= coarse_best - 1e-12);

  // Reported weights reproduce the reported value.
  const double sharpe = (best.w.dot(m.mu()) - r_f) / std::sqrt(best.w.dot(m.cov() * best.w));
  CHECK(best.sharpe == doctest::Approx(sharpe).epsilon(1e-12));
  CHECK(best.value ==
        doctest::Approx(sharpe / as_score(best.b_star, m.alpha(), m.theta())).epsilon(1e-9));
}

TEST_CASE("single-asset market pins the maximizer at its beta") {
  Eigen::VectorXd mu(1), sigma(1), beta(1);
  mu << 0.07;
  sigma << 0.2;
  beta << 0.3;
  const MarketModel m(1.2, 1.0, mu, sigma, beta, 0.04 * Eigen::MatrixXd::Identity(1, 1));
  const AsRatioMax best = maximize_as_ratio(m, 0.01);
  CHECK(best.b_star == doctest::Approx(0.3).epsilon(1e-9));
  REQUIRE(best.w.size() == 1);
  CHECK(best.w[0] == doctest::Approx(1.0).epsilon(1e-12));
  const double sharpe = (0.07 - 0.01) / 0.2;
  CHECK(best.value == doctest::Approx(sharpe / as_score(0.3, 1.2, 1.0)).epsilon(1e-9));
}
