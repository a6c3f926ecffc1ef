#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "blc/finiteness.hpp"

namespace blc {

/// An m-tuple of positive definite matrices A_j on the target spaces.
struct GaussianInput {
  std::vector<Eigen::MatrixXd> matrices;
};

struct SolverConfig {
  int starts = 8;
  int max_iter = 5000;
  double tol = 1e-8;
  std::uint64_t seed = 0;
  int finiteness_budget = 64;
};

enum class Outcome {
  Finite,               // value holds the best constant found
  Infinite,             // a certificate proves BL = infinity
  ApparentlyUnbounded,  // the optimizer exceeded the divergence threshold
};

std::string to_string(Outcome outcome);

struct OptimizeReport {
  std::string method;
  Outcome outcome = Outcome::Finite;
  double value = 0.0;  // BL (not squared); +inf unless outcome == Finite
  GaussianInput argument;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  int starts_used = 0;
  int best_start = -1;
  std::optional<FinitenessVerdict> verdict;       // finiteness precheck, when run
  std::optional<DivergenceDirection> divergence;  // lambda ray, Barthe route
  std::string note;

  bool finite() const { return outcome == Outcome::Finite; }
};

}  // namespace blc
