#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

namespace ntsopt {

enum class LpStatus { Optimal, Infeasible, Unbounded };
enum class LpRel { Le, Eq, Ge };

// minimize c'x subject to A x (<=, =, >=) b and lb <= x <= ub.
// Lower bounds must be finite; +inf upper bounds are allowed.
struct LpProblem {
  Eigen::VectorXd c;
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  std::vector<LpRel> rel;
  Eigen::VectorXd lb;
  Eigen::VectorXd ub;
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;
  double objective = std::numeric_limits<double>::quiet_NaN();
};

// Dense two-phase tableau simplex with Bland's anti-cycling rule; pivots are
// deterministic (lowest eligible index), so the returned vertex is too.
LpSolution solve_lp(const LpProblem& problem);

}  // namespace ntsopt
