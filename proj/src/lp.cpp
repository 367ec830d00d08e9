#include "ntsopt/lp.hpp"

#include <cmath>
#include <stdexcept>

#include "ntsopt/errors.hpp"

namespace ntsopt {

namespace {

constexpr double kPivotEps = 1e-11;
constexpr double kCostEps = 1e-9;

// Tableau layout: rows 0..m-1 are constraints, row m holds reduced costs;
// column n_total is the right-hand side.
struct Tableau {
  Eigen::MatrixXd t;
  std::vector<int> basis;

  int rows() const { return static_cast<int>(t.rows()) - 1; }
  int cols() const { return static_cast<int>(t.cols()) - 1; }

  void pivot(int row, int col) {
    t.row(row) /= t(row, col);
    const int total_rows = static_cast<int>(t.rows());
    for (int r = 0; r < total_rows; ++r) {
      if (r == row) continue;
      const double factor = t(r, col);
      if (factor != 0.0) t.row(r) -= factor * t.row(row);
    }
    basis[row] = col;
  }

  // Bland's rule: entering = lowest-index column with negative reduced cost,
  // leaving = lowest ratio with ties broken by lowest basis index.
  // Returns Optimal when no entering column exists, Unbounded when a column
  // has no positive pivot.
  LpStatus iterate(int usable_cols) {
    const long m = rows();
    const long rhs_col = cols();
    for (long guard = 0; guard < 100000; ++guard) {
      long entering = -1;
      for (long j = 0; j < usable_cols; ++j) {
        if (t(m, j) < -kCostEps) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return LpStatus::Optimal;

      long leaving = -1;
      double best_ratio = 0.0;
      for (long r = 0; r < m; ++r) {
        const double a = t(r, entering);
        if (a <= kPivotEps) continue;
        const double ratio = t(r, rhs_col) / a;
        if (leaving < 0 || ratio < best_ratio - 1e-12 ||
            (std::abs(ratio - best_ratio) <= 1e-12 && basis[r] < basis[leaving])) {
          leaving = r;
          best_ratio = ratio;
        }
      }
      if (leaving < 0) return LpStatus::Unbounded;
      pivot(static_cast<int>(leaving), static_cast<int>(entering));
    }
    throw ConvergenceError("solve_lp: simplex iteration cap reached");
  }
};

}  // namespace

LpSolution solve_lp(const LpProblem& problem) {
  const int n = static_cast<int>(problem.c.size());
  const int m_user = static_cast<int>(problem.b.size());
  if (problem.a.rows() != m_user || (m_user > 0 && problem.a.cols() != n) ||
      static_cast<int>(problem.rel.size()) != m_user || problem.lb.size() != n ||
      problem.ub.size() != n)
    throw std::invalid_argument("solve_lp: inconsistent problem dimensions");
  for (int j = 0; j < n; ++j) {
    if (!std::isfinite(problem.lb[j])) throw std::invalid_argument("solve_lp: lower bounds must be finite");
    if (problem.ub[j] < problem.lb[j] - 1e-15) return {LpStatus::Infeasible, {}, {}};
  }

  // Shift to y = x - lb >= 0 and turn finite upper bounds into rows.
  std::vector<LpRel> rel = problem.rel;
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  for (int r = 0; r < m_user; ++r) {
    rows.push_back(problem.a.row(r));
    rhs.push_back(problem.b[r] - problem.a.row(r).dot(problem.lb));
  }
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(problem.ub[j])) {
      Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
      row[j] = 1.0;
      rows.push_back(row);
      rhs.push_back(problem.ub[j] - problem.lb[j]);
      rel.push_back(LpRel::Le);
    }
  }
  const int m = static_cast<int>(rows.size());

  // Columns: n structural + one slack/surplus per inequality + m artificials.
  int n_slack = 0;
  for (auto r : rel)
    if (r != LpRel::Eq) ++n_slack;
  const int n_total = n + n_slack + m;

  Tableau tab;
  tab.t = Eigen::MatrixXd::Zero(m + 1, n_total + 1);
  tab.basis.assign(m, -1);

  int slack_col = n;
  for (int r = 0; r < m; ++r) {
    double sign = 1.0;
    if (rhs[r] < 0.0) sign = -1.0;  // artificials need nonnegative RHS
    tab.t.block(r, 0, 1, n) = sign * rows[r].transpose();
    tab.t(r, n_total) = sign * rhs[r];
    if (rel[r] != LpRel::Eq) {
      tab.t(r, slack_col) = sign * (rel[r] == LpRel::Le ? 1.0 : -1.0);
      ++slack_col;
    }
    const int art_col = n + n_slack + r;
    tab.t(r, art_col) = 1.0;
    tab.basis[r] = art_col;
  }

  // Phase 1: minimize the sum of artificials. Bottom row holds reduced costs
  // with the negated objective in the RHS slot; the artificial costs cancel
  // against their identity columns, leaving -sum of the constraint rows.
  for (int r = 0; r < m; ++r) tab.t.row(m) -= tab.t.row(r);
  tab.t.block(m, n + n_slack, 1, m).setZero();
  const LpStatus phase1 = tab.iterate(n + n_slack);
  if (phase1 == LpStatus::Unbounded)
    throw ConvergenceError("solve_lp: phase-1 reported unbounded (should be impossible)");
  const double infeasibility = -tab.t(m, n_total);
  if (infeasibility > 1e-8) return {LpStatus::Infeasible, {}, {}};

  // Drive any artificial still in the basis out, or drop its redundant row.
  for (int r = 0; r < m; ++r) {
    if (tab.basis[r] < n + n_slack) continue;
    int col = -1;
    for (int j = 0; j < n + n_slack; ++j) {
      if (std::abs(tab.t(r, j)) > 1e-9) {
        col = j;
        break;
      }
    }
    if (col >= 0) {
      tab.pivot(r, col);
    } else {
      tab.t.row(r).setZero();  // redundant constraint
      tab.basis[r] = -1;
    }
  }

  // Phase 2: rebuild reduced costs for the real objective.
  tab.t.row(m).setZero();
  tab.t.block(m, 0, 1, n) = problem.c.transpose();
  for (int r = 0; r < m; ++r) {
    if (tab.basis[r] < 0 || tab.basis[r] >= n) continue;
    tab.t.row(m) -= problem.c[tab.basis[r]] * tab.t.row(r);
  }
  // Zero out artificial columns so they can never re-enter.
  tab.t.block(0, n + n_slack, m + 1, m).setZero();

  const LpStatus phase2 = tab.iterate(n + n_slack);
  if (phase2 == LpStatus::Unbounded) return {LpStatus::Unbounded, {}, {}};

  Eigen::VectorXd y = Eigen::VectorXd::Zero(n_total);
  for (int r = 0; r < m; ++r)
    if (tab.basis[r] >= 0) y[tab.basis[r]] = tab.t(r, n_total);
  LpSolution sol;
  sol.status = LpStatus::Optimal;
  sol.x = y.head(n) + problem.lb;
  sol.objective = problem.c.dot(sol.x);
  return sol;
}

}  // namespace ntsopt
