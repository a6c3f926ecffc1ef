#pragma once

#include <Eigen/Dense>

namespace blc {

enum class LpStatus { Optimal, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Optimal;
  double objective = 0.0;
  Eigen::VectorXd x;
  int pivots = 0;
};

/// Solves  maximize c.x  subject to  A x <= b, x >= 0  with b >= 0, using a
/// dense tableau and Bland's rule. The slack basis is the starting vertex.
LpResult solve_lp_slack_feasible(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                 const Eigen::VectorXd& c);

}  // namespace blc
