#include "ntsopt/frontier.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "ntsopt/errors.hpp"
#include "ntsopt/lp.hpp"
#include "ntsopt/parallel.hpp"

namespace ntsopt {

namespace {

// Equally spaced grid over [lo, hi]; collapses to repeated lo when lo == hi.
std::vector<double> linear_grid(double lo, double hi, int count) {
  std::vector<double> g(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k)
    g[static_cast<std::size_t>(k)] = lo + static_cast<double>(k) * (hi - lo) / (count - 1);
  return g;
}

// Feasible vertex of {1'w = 1, w >= 0, rows * w >= rhs}, or infeasible.
LpSolution simplex_phase1(int n, const Eigen::MatrixXd& rows, const Eigen::VectorXd& rhs) {
  LpProblem lp;
  lp.c = Eigen::VectorXd::Zero(n);
  lp.a.resize(1 + rows.rows(), n);
  lp.a.row(0) = Eigen::RowVectorXd::Ones(n);
  lp.a.bottomRows(rows.rows()) = rows;
  lp.b.resize(1 + rows.rows());
  lp.b[0] = 1.0;
  lp.b.tail(rows.rows()) = rhs;
  lp.rel.assign(static_cast<std::size_t>(1 + rows.rows()), LpRel::Ge);
  lp.rel[0] = LpRel::Eq;
  lp.lb = Eigen::VectorXd::Zero(n);
  lp.ub = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  return solve_lp(lp);
}

}  // namespace

FrontierPoint min_disp_portfolio(const MarketModel& m, double b_star, double m_star,
                                 const QpOptions& opts) {
  const int n = m.size();
  Eigen::MatrixXd extra(2, n);
  extra.row(0) = m.mu().transpose();
  extra.row(1) = m.beta().transpose();
  Eigen::Vector2d rhs(m_star, b_star);
  const LpSolution start = simplex_phase1(n, extra, rhs);
  if (start.status == LpStatus::Infeasible) return {};
  if (start.status != LpStatus::Optimal)
    throw ConvergenceError("min_disp_portfolio: phase-1 LP failed");

  QpProblem qp;
  qp.q = 2.0 * m.cov();
  qp.c = Eigen::VectorXd::Zero(n);
  qp.a_eq = Eigen::MatrixXd::Ones(1, n);
  qp.b_eq = Eigen::VectorXd::Ones(1);
  qp.a_in.resize(2 + n, n);
  qp.a_in.topRows(2) = extra;
  qp.a_in.bottomRows(n) = Eigen::MatrixXd::Identity(n, n);
  qp.b_in = Eigen::VectorXd::Zero(2 + n);
  qp.b_in.head(2) = rhs;

  const QpSolution sol = solve_qp(qp, start.x, opts);
  if (!sol.converged || !(sol.kkt_residual < 1e-8))
    throw ConvergenceError("min_disp_portfolio: QP did not reach the optimality tolerance");

  FrontierPoint p;
  p.w = sol.x;
  p.disp = std::sqrt(std::max(0.0, sol.x.dot(m.cov() * sol.x)));
  p.asym = sol.x.dot(m.beta());
  p.reward = sol.x.dot(m.mu());
  p.feasible = true;
  p.kkt_residual = sol.kkt_residual;
  return p;
}

FrontierSurface frontier_surface(const MarketModel& m, int b_points, int m_points, int threads) {
  if (b_points < 2 || m_points < 2)
    throw std::invalid_argument("frontier_surface: need at least two grid points per axis");
  FrontierSurface s;
  s.b_grid = linear_grid(m.beta().minCoeff(), m.beta().maxCoeff(), b_points);
  s.m_grid = linear_grid(m.mu().minCoeff(), m.mu().maxCoeff(), m_points);
  s.points.assign(static_cast<std::size_t>(b_points),
                  std::vector<FrontierPoint>(static_cast<std::size_t>(m_points)));
  std::mutex errors_mutex;
  parallel_for(
      static_cast<std::size_t>(b_points) * static_cast<std::size_t>(m_points),
      [&](std::size_t cell) {
        const std::size_t i = cell / static_cast<std::size_t>(m_points);
        const std::size_t j = cell % static_cast<std::size_t>(m_points);
        try {
          s.points[i][j] = min_disp_portfolio(m, s.b_grid[i], s.m_grid[j]);
        } catch (const std::exception& e) {
          // A broken cell must not abort the other 2600: record and move on.
          const std::lock_guard<std::mutex> lock(errors_mutex);
          s.errors.push_back("cell (" + std::to_string(i) + "," + std::to_string(j) +
                             "): " + e.what());
        }
      },
      threads);
  return s;
}

Eigen::VectorXd tangency_portfolio(const MarketModel& m, double r_f, double b,
                                   const QpOptions& opts) {
  const int n = m.size();
  const Eigen::VectorXd excess = m.mu() - Eigen::VectorXd::Constant(n, r_f);
  if (excess.maxCoeff() <= 0.0)
    throw std::domain_error("tangency_portfolio: no asset earns more than the risk-free rate");

  // Fractional program in w becomes a QP in y = w / (excess return): the
  // simplex constraint turns into y >= 0 (scale recovered afterwards) and the
  // Sharpe objective into min y' cov y at unit excess return. The asymmetry
  // floor w'beta >= b is positively homogeneous, so it maps to (beta - b)'y >= 0.
  Eigen::MatrixXd asym_row = (m.beta() - Eigen::VectorXd::Constant(n, b)).transpose();

  LpProblem lp;
  lp.c = Eigen::VectorXd::Zero(n);
  lp.a.resize(2, n);
  lp.a.row(0) = excess.transpose();
  lp.a.row(1) = asym_row;
  lp.b = Eigen::Vector2d(1.0, 0.0);
  lp.rel = {LpRel::Eq, LpRel::Ge};
  lp.lb = Eigen::VectorXd::Zero(n);
  lp.ub = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  const LpSolution start = solve_lp(lp);
  if (start.status == LpStatus::Infeasible)
    throw std::domain_error(
        "tangency_portfolio: asymmetry floor unreachable at positive excess return");
  if (start.status != LpStatus::Optimal)
    throw ConvergenceError("tangency_portfolio: phase-1 LP failed");

  QpProblem qp;
  qp.q = 2.0 * m.cov();
  qp.c = Eigen::VectorXd::Zero(n);
  qp.a_eq = excess.transpose();
  qp.b_eq = Eigen::VectorXd::Ones(1);
  qp.a_in.resize(1 + n, n);
  qp.a_in.row(0) = asym_row;
  qp.a_in.bottomRows(n) = Eigen::MatrixXd::Identity(n, n);
  qp.b_in = Eigen::VectorXd::Zero(1 + n);

  const QpSolution sol = solve_qp(qp, start.x, opts);
  if (!sol.converged || !(sol.kkt_residual < 1e-8))
    throw ConvergenceError("tangency_portfolio: QP did not reach the optimality tolerance");

  const double scale = sol.x.sum();  // > 0: y >= 0, y != 0 at unit excess
  if (!(scale > 0.0)) throw ConvergenceError("tangency_portfolio: degenerate normalization");
  return sol.x / scale;
}

double as_score(double b, double alpha, double theta) {
  const double bound = stdnts_beta_bound(alpha, theta);
  if (!(std::abs(b) <= bound))
    throw std::domain_error("as_score: asymmetry level outside the admissible band");
  return (bound - b) / (2.0 * bound);
}

double as_ratio(const MarketModel& m, double b, double r_f) {
  const Eigen::VectorXd w = tangency_portfolio(m, r_f, b);
  const double sharpe = (w.dot(m.mu()) - r_f) / disp_measure(m, w);
  const double a = as_score(b, m.alpha(), m.theta());
  if (a < 1e-12) throw std::domain_error("as_ratio: score vanishes at the asymmetry bound");
  return sharpe / a;
}

AsRatioCurve as_ratio_curve(const MarketModel& m, double r_f, int points) {
  if (points < 2) throw std::invalid_argument("as_ratio_curve: need at least two points");
  AsRatioCurve c;
  c.b = linear_grid(m.beta().minCoeff(), m.beta().maxCoeff(), points);
  const std::size_t count = c.b.size();
  c.w.assign(count, {});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  c.sharpe.assign(count, nan);
  c.a_score.assign(count, nan);
  c.as_value.assign(count, nan);
  c.feasible.assign(count, false);
  for (std::size_t k = 0; k < count; ++k) {
    try {
      const Eigen::VectorXd w = tangency_portfolio(m, r_f, c.b[k]);
      c.w[k] = w;
      c.sharpe[k] = (w.dot(m.mu()) - r_f) / disp_measure(m, w);
      c.a_score[k] = as_score(c.b[k], m.alpha(), m.theta());
      c.as_value[k] = c.sharpe[k] / c.a_score[k];
      c.feasible[k] = true;
    } catch (const std::domain_error&) {
      // Slice has no tangency (floor too high); leave the NaN marker.
    }
  }
  return c;
}

AsRatioMax maximize_as_ratio(const MarketModel& m, double r_f, int scan_points) {
  const AsRatioCurve curve = as_ratio_curve(m, r_f, scan_points);
  int best = -1;
  for (std::size_t k = 0; k < curve.b.size(); ++k)
    if (curve.feasible[k] && (best < 0 || curve.as_value[k] > curve.as_value[static_cast<std::size_t>(best)]))
      best = static_cast<int>(k);
  if (best < 0)
    throw std::domain_error("maximize_as_ratio: no feasible tangency on the asymmetry range");

  const auto value_at = [&](double b) {
    try {
      return as_ratio(m, b, r_f);
    } catch (const std::domain_error&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  // Golden-section around the best scanned cell (clamped at the range ends).
  const std::size_t bi = static_cast<std::size_t>(best);
  double lo = curve.b[bi > 0 ? bi - 1 : bi];
  double hi = curve.b[bi + 1 < curve.b.size() ? bi + 1 : bi];
  double best_b = curve.b[bi];
  double best_v = curve.as_value[bi];
  if (hi > lo) {
    constexpr double kInvPhi = 0.6180339887498949;
    double x1 = hi - kInvPhi * (hi - lo);
    double x2 = lo + kInvPhi * (hi - lo);
    double f1 = value_at(x1);
    double f2 = value_at(x2);
    for (int iter = 0; iter < 80 && (hi - lo) > 1e-11 * (1.0 + std::abs(best_b)); ++iter) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + kInvPhi * (hi - lo);
        f2 = value_at(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - kInvPhi * (hi - lo);
        f1 = value_at(x1);
      }
      const double cand_b = (f1 > f2) ? x1 : x2;
      const double cand_v = std::max(f1, f2);
      if (cand_v > best_v) {
        best_v = cand_v;
        best_b = cand_b;
      }
    }
  }

  AsRatioMax out;
  out.b_star = best_b;
  out.value = best_v;
  out.w = tangency_portfolio(m, r_f, best_b);
  out.sharpe = (out.w.dot(m.mu()) - r_f) / disp_measure(m, out.w);
  return out;
}

Eigen::VectorXd sharpe_max_portfolio(const MarketModel& m, double r_f) {
  // w'beta >= min(beta) holds for every simplex portfolio, so the floor never binds.
  return tangency_portfolio(m, r_f, m.beta().minCoeff());
}

}  // namespace ntsopt
