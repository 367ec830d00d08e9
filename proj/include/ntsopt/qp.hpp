#pragma once

#include <Eigen/Dense>

namespace ntsopt {

// minimize 1/2 x'Qx + c'x  subject to  Aeq x = beq,  Ain x >= bin.
// Q must be symmetric positive semidefinite. Bounds go in as Ain rows.
struct QpProblem {
  Eigen::MatrixXd q;
  Eigen::VectorXd c;
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd a_in;
  Eigen::VectorXd b_in;
};

struct QpSolution {
  bool converged = false;
  Eigen::VectorXd x;
  double objective = 0.0;
  // max of stationarity, feasibility and complementarity residuals; reported
  // so callers can assert solution quality instead of trusting the flag.
  double kkt_residual = 0.0;
  Eigen::VectorXd mult_eq;
  Eigen::VectorXd mult_in;  // zero for inactive constraints
  int iterations = 0;
};

struct QpOptions {
  int max_iterations = 1000;
  double feasibility_tol = 1e-9;
};

// Primal active-set method. x0 must satisfy all constraints to within
// feasibility_tol (use a phase-1 LP to produce one); steps solve the
// equality-constrained subproblem on the null space of the working set,
// blocking constraints enter one at a time, and constraints with negative
// multipliers leave (most negative first, lowest index on ties).
QpSolution solve_qp(const QpProblem& problem, const Eigen::VectorXd& x0, const QpOptions& opts = {});

}  // namespace ntsopt
