#include "ntsopt/budget.hpp"

#include <cmath>
#include <stdexcept>

#include "ntsopt/backtest.hpp"
#include "ntsopt/errors.hpp"
#include "ntsopt/lp.hpp"
#include "ntsopt/qp.hpp"
#include "ntsopt/risk.hpp"

namespace ntsopt {

namespace {

BudgetStep zero_step(Eigen::Index n, RiskMeasure measure, double d) {
  BudgetStep s;
  s.delta_w = Eigen::VectorXd::Zero(n);
  s.predicted_change = 0.0;
  s.measure = measure;
  s.box_radius = d;
  return s;
}

}  // namespace

BudgetStep local_risk_budget(const Eigen::VectorXd& c, const Eigen::VectorXd& mu, double d,
                             const Eigen::VectorXd& w, RiskMeasure measure) {
  const Eigen::Index n = c.size();
  if (mu.size() != n || w.size() != n)
    throw std::invalid_argument("local_risk_budget: dimension mismatch");
  if (!(d >= 0.0) || !std::isfinite(d))
    throw std::invalid_argument("local_risk_budget: box radius must be nonnegative");
  if (n == 0 || d == 0.0) return zero_step(n, measure, d);

  // Per-coordinate box, clipped so the new weight cannot go negative.
  Eigen::VectorXd lb(n), ub(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    lb[i] = std::max(-d, -std::max(w[i], 0.0));
    ub[i] = d;
  }

  LpProblem lp;
  lp.c = c;
  lp.a.resize(2, n);
  lp.a.row(0) = Eigen::RowVectorXd::Ones(n);
  lp.a.row(1) = mu.transpose();
  lp.b = Eigen::Vector2d(0.0, 0.0);
  lp.rel = {LpRel::Eq, LpRel::Ge};
  lp.lb = lb;
  lp.ub = ub;
  const LpSolution sol = solve_lp(lp);
  // delta = 0 is always feasible, so anything but an optimum is a numerical
  // breakdown; the contract here is "no errors", so fall back to standing still.
  if (sol.status != LpStatus::Optimal) return zero_step(n, measure, d);
  if (sol.objective >= -1e-15) return zero_step(n, measure, d);

  // Minimum-norm point of the optimal face, so ties resolve deterministically
  // and to the smallest actual reallocation.
  QpProblem qp;
  qp.q = 2.0 * Eigen::MatrixXd::Identity(n, n);
  qp.c = Eigen::VectorXd::Zero(n);
  qp.a_eq.resize(2, n);
  qp.a_eq.row(0) = c.transpose();
  qp.a_eq.row(1) = Eigen::RowVectorXd::Ones(n);
  qp.b_eq = Eigen::Vector2d(sol.objective, 0.0);
  qp.a_in.resize(1 + 2 * n, n);
  qp.a_in.row(0) = mu.transpose();
  qp.a_in.middleRows(1, n) = Eigen::MatrixXd::Identity(n, n);
  qp.a_in.bottomRows(n) = -Eigen::MatrixXd::Identity(n, n);
  qp.b_in.resize(1 + 2 * n);
  qp.b_in[0] = 0.0;
  qp.b_in.segment(1, n) = lb;
  qp.b_in.tail(n) = -ub;

  Eigen::VectorXd delta = sol.x;
  const QpSolution polish = solve_qp(qp, sol.x);
  if (polish.converged && polish.kkt_residual < 1e-8) delta = polish.x;

  BudgetStep out;
  out.delta_w = delta;
  out.predicted_change = c.dot(delta);
  out.measure = measure;
  out.box_radius = d;
  return out;
}

BudgetTrajectory iterative_budget(const MarketModel& m, const Eigen::VectorXd& w0, double d,
                                  double eta, int steps, RiskMeasure measure, BudgetDriver driver,
                                  const std::optional<ReturnPanel>& panel,
                                  const QuadratureConfig& q) {
  const Eigen::Index n = m.size();
  if (w0.size() != n) throw std::invalid_argument("iterative_budget: weight dimension mismatch");
  if (std::abs(w0.sum() - 1.0) > 1e-8 || w0.minCoeff() < -1e-10)
    throw std::invalid_argument("iterative_budget: w0 must lie on the simplex");
  if (steps < 0) throw std::invalid_argument("iterative_budget: negative step count");
  if (panel) {
    panel->validate();
    if (panel->returns.cols() != n)
      throw std::invalid_argument("iterative_budget: panel width does not match the model");
  }

  const GaussianModel gauss = to_gaussian(m);

  BudgetTrajectory traj;
  traj.measure = measure;
  traj.driver = driver;
  traj.box_radius = d;
  traj.eta = eta;
  traj.iterations.reserve(static_cast<std::size_t>(steps) + 1);

  Eigen::VectorXd w = w0.cwiseMax(0.0);
  w /= w.sum();

  const auto record = [&](const Eigen::VectorXd& weights) {
    BudgetIteration it;
    it.w = weights;
    it.var_model = var_portfolio(m, weights, eta, q);
    it.cvar_model = cvar_portfolio(m, weights, eta, q);
    if (panel) {
      const Eigen::VectorXd r = panel->returns * weights;
      const std::vector<double> series(r.data(), r.data() + r.size());
      const auto [hv, hc] = historical_var_cvar(series, eta);
      it.var_hist = hv;
      it.cvar_hist = hc;
    }
    traj.iterations.push_back(std::move(it));
  };

  record(w);
  for (int k = 1; k <= steps; ++k) {
    try {
      Eigen::VectorXd c;
      if (driver == BudgetDriver::Nts)
        c = (measure == RiskMeasure::VaR) ? mct_var(m, w, eta, q) : mct_cvar(m, w, eta, q);
      else
        c = (measure == RiskMeasure::VaR) ? gaussian_mct_var(gauss, w, eta)
                                          : gaussian_mct_cvar(gauss, w, eta);
      const BudgetStep step = local_risk_budget(c, m.mu(), d, w, measure);
      w += step.delta_w;
      w = w.cwiseMax(0.0);  // clip the 1e-16 dust so the simplex invariant holds
      w /= w.sum();
      record(w);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("iterative_budget: iteration " + std::to_string(k) + ": " + e.what());
    }
  }
  return traj;
}

}  // namespace ntsopt
