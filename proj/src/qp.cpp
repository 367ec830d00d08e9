#include "ntsopt/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ntsopt {

namespace {

// Stack the equality rows with the working-set inequality rows.
Eigen::MatrixXd working_matrix(const QpProblem& p, const std::vector<int>& working) {
  const Eigen::Index n = p.q.rows();
  const Eigen::Index m_eq = p.a_eq.rows();
  Eigen::MatrixXd a(m_eq + static_cast<Eigen::Index>(working.size()), n);
  if (m_eq > 0) a.topRows(m_eq) = p.a_eq;
  for (std::size_t k = 0; k < working.size(); ++k) a.row(m_eq + k) = p.a_in.row(working[k]);
  return a;
}

}  // namespace

QpSolution solve_qp(const QpProblem& p, const Eigen::VectorXd& x0, const QpOptions& opts) {
  const Eigen::Index n = p.q.rows();
  if (p.q.cols() != n || p.c.size() != n) throw std::invalid_argument("solve_qp: bad Q/c dimensions");
  if (p.a_eq.rows() != p.b_eq.size() || (p.a_eq.rows() > 0 && p.a_eq.cols() != n))
    throw std::invalid_argument("solve_qp: bad equality dimensions");
  if (p.a_in.rows() != p.b_in.size() || (p.a_in.rows() > 0 && p.a_in.cols() != n))
    throw std::invalid_argument("solve_qp: bad inequality dimensions");
  if (x0.size() != n) throw std::invalid_argument("solve_qp: bad start dimension");

  const Eigen::Index m_eq = p.a_eq.rows();
  const Eigen::Index m_in = p.a_in.rows();
  const double ftol = opts.feasibility_tol;

  if (m_eq > 0 && (p.a_eq * x0 - p.b_eq).cwiseAbs().maxCoeff() > 100 * ftol)
    throw std::invalid_argument("solve_qp: x0 violates equality constraints");
  if (m_in > 0 && (p.a_in * x0 - p.b_in).minCoeff() < -100 * ftol)
    throw std::invalid_argument("solve_qp: x0 violates inequality constraints");

  Eigen::VectorXd x = x0;
  // Initial working set: inequality rows active at x0 whose addition keeps
  // the stacked constraint matrix full row rank.
  std::vector<int> working;
  for (int i = 0; i < m_in; ++i) {
    if (std::abs(p.a_in.row(i).dot(x) - p.b_in[i]) <= ftol) {
      working.push_back(i);
      Eigen::MatrixXd a = working_matrix(p, working);
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a.transpose());
      if (qr.rank() < a.rows()) working.pop_back();
    }
  }

  QpSolution sol;
  for (sol.iterations = 0; sol.iterations < opts.max_iterations; ++sol.iterations) {
    const Eigen::MatrixXd a = working_matrix(p, working);
    const Eigen::Index m_w = a.rows();
    const Eigen::VectorXd g = p.q * x + p.c;

    // Step restricted to the null space of the working constraints.
    Eigen::VectorXd step = Eigen::VectorXd::Zero(n);
    Eigen::Index null_dim = n;
    Eigen::MatrixXd z;
    if (m_w > 0) {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a.transpose());
      const Eigen::Index rank = qr.rank();
      null_dim = n - rank;
      if (null_dim > 0) {
        z = qr.householderQ() * Eigen::MatrixXd::Identity(n, n).rightCols(null_dim);
      }
    } else {
      z = Eigen::MatrixXd::Identity(n, n);
    }
    if (null_dim > 0) {
      Eigen::MatrixXd h = z.transpose() * p.q * z;
      // Tiny ridge keeps the reduced Hessian factorizable when Q is only
      // semidefinite on the null space.
      h.diagonal().array() += 1e-12 * (1.0 + h.diagonal().cwiseAbs().maxCoeff());
      const Eigen::VectorXd reduced = z.transpose() * g;
      step = -z * h.ldlt().solve(reduced);
    }

    const double step_norm = step.cwiseAbs().maxCoeff();
    if (step_norm <= 1e-11 * (1.0 + x.cwiseAbs().maxCoeff())) {
      // Stationary on the working set; check multipliers.
      Eigen::VectorXd lambda;
      if (m_w > 0) {
        lambda = a.transpose().colPivHouseholderQr().solve(g);
      } else {
        lambda.resize(0);
      }
      int drop = -1;
      double most_negative = -1e-9;
      for (std::size_t k = 0; k < working.size(); ++k) {
        const double mult = lambda[m_eq + k];
        if (mult < most_negative) {
          most_negative = mult;
          drop = static_cast<int>(k);
        }
      }
      if (drop < 0) {
        sol.converged = true;
        sol.x = x;
        sol.objective = 0.5 * x.dot(p.q * x) + p.c.dot(x);
        sol.mult_eq = m_eq > 0 ? lambda.head(m_eq).eval() : Eigen::VectorXd();
        sol.mult_in = Eigen::VectorXd::Zero(m_in);
        for (std::size_t k = 0; k < working.size(); ++k) sol.mult_in[working[k]] = lambda[m_eq + k];

        // KKT residuals: stationarity, primal feasibility, complementarity.
        Eigen::VectorXd grad = p.q * x + p.c;
        if (m_eq > 0) grad -= p.a_eq.transpose() * sol.mult_eq;
        if (m_in > 0) grad -= p.a_in.transpose() * sol.mult_in;
        double res = grad.cwiseAbs().maxCoeff();
        if (m_eq > 0) res = std::max(res, (p.a_eq * x - p.b_eq).cwiseAbs().maxCoeff());
        if (m_in > 0) {
          const Eigen::VectorXd slack = p.a_in * x - p.b_in;
          res = std::max(res, std::max(0.0, -slack.minCoeff()));
          res = std::max(res, slack.cwiseProduct(sol.mult_in).cwiseAbs().maxCoeff());
        }
        sol.kkt_residual = res;
        return sol;
      }
      working.erase(working.begin() + drop);
      continue;
    }

    // Ratio test against constraints outside the working set.
    double alpha = 1.0;
    int blocking = -1;
    for (int i = 0; i < m_in; ++i) {
      if (std::find(working.begin(), working.end(), i) != working.end()) continue;
      const double direction = p.a_in.row(i).dot(step);
      if (direction >= -1e-13) continue;
      const double slack = p.a_in.row(i).dot(x) - p.b_in[i];
      const double ratio = std::max(0.0, slack / (-direction));
      if (ratio < alpha - 1e-15) {
        alpha = ratio;
        blocking = i;
      }
    }
    x += alpha * step;
    if (blocking >= 0) working.push_back(blocking);
  }

  sol.converged = false;
  sol.x = x;
  sol.objective = 0.5 * x.dot(p.q * x) + p.c.dot(x);
  sol.kkt_residual = std::numeric_limits<double>::infinity();
  return sol;
}

}  // namespace ntsopt
