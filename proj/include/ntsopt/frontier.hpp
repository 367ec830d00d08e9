#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

#include "ntsopt/market.hpp"
#include "ntsopt/qp.hpp"

namespace ntsopt {

// One solved cell of the mean-dispersion-asymmetry program. Infeasible cells
// carry NaN axes and an empty weight vector.
struct FrontierPoint {
  Eigen::VectorXd w;
  double disp = std::numeric_limits<double>::quiet_NaN();
  double asym = std::numeric_limits<double>::quiet_NaN();
  double reward = std::numeric_limits<double>::quiet_NaN();
  bool feasible = false;
  double kkt_residual = std::numeric_limits<double>::quiet_NaN();
};

// Minimize sqrt(w' cov w) over the long-only simplex subject to
// w'mu >= m_star and w'beta >= b_star. Solved as a QP on the variance with a
// phase-1 LP supplying the starting vertex; an empty constraint set returns
// feasible = false, solver breakdown throws ConvergenceError.
FrontierPoint min_disp_portfolio(const MarketModel& m, double b_star, double m_star,
                                 const QpOptions& opts = {});

// points[i][j] solves (b_grid[i], m_grid[j]); both grids split
// [min, max] of beta resp. mu into equal steps.
struct FrontierSurface {
  std::vector<double> b_grid;
  std::vector<double> m_grid;
  std::vector<std::vector<FrontierPoint>> points;
  std::vector<std::string> errors;  // per-cell solver failures, grid kept going
};

FrontierSurface frontier_surface(const MarketModel& m, int b_points = 51, int m_points = 51,
                                 int threads = 0);

// Sharpe-optimal long-only weights among portfolios with w'beta >= b, via the
// standard fractional-to-quadratic transform (minimize y' cov y with unit
// excess return, then normalize). Throws domain_error when no feasible
// portfolio earns more than r_f or the asymmetry floor is unreachable.
Eigen::VectorXd tangency_portfolio(const MarketModel& m, double r_f, double b,
                                   const QpOptions& opts = {});

// Affine asymmetry score: 1 at the most left-skew-tolerant end of the
// admissible band, 0 at the other; 1/2 for a symmetric portfolio.
double as_score(double b, double alpha, double theta);

// Sharpe ratio of the tangency portfolio at asymmetry floor b, divided by the
// score A(b): rewards strategies that buy their Sharpe with right skew.
double as_ratio(const MarketModel& m, double b, double r_f);

struct AsRatioCurve {
  std::vector<double> b;
  std::vector<Eigen::VectorXd> w;  // empty where the slice has no tangency
  std::vector<double> sharpe;
  std::vector<double> a_score;
  std::vector<double> as_value;
  std::vector<bool> feasible;
};

AsRatioCurve as_ratio_curve(const MarketModel& m, double r_f, int points = 51);

struct AsRatioMax {
  double b_star = 0.0;
  double value = 0.0;
  double sharpe = 0.0;
  Eigen::VectorXd w;
};

// Coarse scan over the beta range followed by golden-section refinement; the
// result never scores below the best scanned point.
AsRatioMax maximize_as_ratio(const MarketModel& m, double r_f, int scan_points = 51);

// Plain Sharpe maximizer: the asymmetry floor set so low it never binds.
Eigen::VectorXd sharpe_max_portfolio(const MarketModel& m, double r_f);

}  // namespace ntsopt
