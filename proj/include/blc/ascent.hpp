#pragma once

#include <functional>
#include <limits>

#include <Eigen/Dense>

namespace blc {

/// Objective for the ascent driver: returns f(x) (or -inf outside the
/// domain) and fills the gradient when the pointer is non-null.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;

struct AscentOptions {
  int max_iter = 5000;
  double tol = 1e-8;  // on the gradient max-norm
  double divergence_threshold = std::numeric_limits<double>::infinity();
  std::function<void(Eigen::VectorXd&)> normalize;
};

struct AscentResult {
  Eigen::VectorXd x;
  double value = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd gradient;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;  // value crossed divergence_threshold
  bool stalled = false;   // no ascent step, or 100 steps with negligible gain
};

/// BFGS maximization with Armijo backtracking. f is nondecreasing across
/// iterations.
AscentResult maximize_bfgs(const Objective& f, Eigen::VectorXd x0, const AscentOptions& options);

}  // namespace blc
