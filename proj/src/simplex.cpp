#include "blc/simplex.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

namespace blc {

namespace {
constexpr double kPivotEps = 1e-12;
}

LpResult solve_lp_slack_feasible(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                 const Eigen::VectorXd& c) {
  const Eigen::Index rows = A.rows();
  const Eigen::Index cols = A.cols();
  if (b.size() != rows || c.size() != cols) throw std::invalid_argument("LP dimension mismatch");
  if ((b.array() < 0.0).any()) throw std::invalid_argument("LP right-hand side must be nonnegative");

  // Columns: structural variables, then slacks, then the right-hand side.
  const Eigen::Index width = cols + rows + 1;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(rows + 1, width);
  t.topLeftCorner(rows, cols) = A;
  t.block(0, cols, rows, rows).setIdentity();
  t.col(width - 1).head(rows) = b;
  t.row(rows).head(cols) = -c.transpose();

  std::vector<Eigen::Index> basis(static_cast<std::size_t>(rows));
  for (Eigen::Index r = 0; r < rows; ++r) basis[static_cast<std::size_t>(r)] = cols + r;

  LpResult result;
  while (true) {
    // Bland's rule: lowest-index improving column, lowest-index basic variable on ties.
    Eigen::Index entering = -1;
    for (Eigen::Index j = 0; j < cols + rows; ++j) {
      if (t(rows, j) < -kPivotEps) {
        entering = j;
        break;
      }
    }
    if (entering < 0) break;

    Eigen::Index leaving = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double a = t(r, entering);
      if (a <= kPivotEps) continue;
      const double ratio = t(r, width - 1) / a;
      if (ratio < best_ratio - kPivotEps ||
          (ratio <= best_ratio + kPivotEps && leaving >= 0 &&
           basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(leaving)])) {
        best_ratio = ratio;
        leaving = r;
      }
    }
    if (leaving < 0) {
      result.status = LpStatus::Unbounded;
      result.objective = std::numeric_limits<double>::infinity();
      return result;
    }

    t.row(leaving) /= t(leaving, entering);
    for (Eigen::Index r = 0; r <= rows; ++r) {
      if (r == leaving) continue;
      const double factor = t(r, entering);
      if (factor != 0.0) t.row(r) -= factor * t.row(leaving);
    }
    basis[static_cast<std::size_t>(leaving)] = entering;
    ++result.pivots;
  }

  result.x = Eigen::VectorXd::Zero(cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::Index var = basis[static_cast<std::size_t>(r)];
    if (var < cols) result.x(var) = t(r, width - 1);
  }
  result.objective = c.dot(result.x);
  return result;
}

}  // namespace blc
