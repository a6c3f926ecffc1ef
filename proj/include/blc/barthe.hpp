#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "blc/datum.hpp"
#include "blc/finiteness.hpp"
#include "blc/linalg.hpp"
#include "blc/report.hpp"
#include "blc/weights.hpp"

namespace blc {

/// Largest K for which the subset enumeration is attempted.
inline constexpr int kMaxFlattenedDimension = 20;

FlattenedExponents flatten_exponents(const BLDatum& datum);

/// Columns v_k = L_i^T R_i^T e_j of the flattened datum, as an n x K matrix.
Eigen::MatrixXd flattened_vectors(const BLDatum& datum, const linalg::RotationParams& rotations);

/// d_I = det((v_k)_{k in I})^2 and q_I over all n-subsets, lexicographic.
/// Throws std::invalid_argument if K < n or K > kMaxFlattenedDimension.
SubsetWeights compute_dI(const BLDatum& datum, const linalg::RotationParams& rotations);

/// prod_k lambda_k^{q_k} / sum_I lambda_I q_I d_I. This is the squared
/// constant at the supremum. Returns +inf when the denominator is <= 1e-300.
double barthe_objective(const SubsetWeights& weights, const FlattenedExponents& q,
                        const Eigen::VectorXd& lambda);

struct LambdaConfig {
  int max_iter = 500;
  double tol = 1e-9;
};

enum class LambdaStatus { Optimal, NotConverged, Unbounded, IdenticallyInfinite };

std::string to_string(LambdaStatus status);

struct LambdaResult {
  LambdaStatus status = LambdaStatus::NotConverged;
  double value = 0.0;      // supremum of barthe_objective (squared scale)
  double log_value = 0.0;
  Eigen::VectorXd lambda;  // maximizer, gauge-fixed
  double gradient_norm = 0.0;
  int iterations = 0;
  std::optional<DivergenceDirection> direction;

  bool bounded() const {
    return status == LambdaStatus::Optimal || status == LambdaStatus::NotConverged;
  }
};

/// Maximizes the objective over lambda. In u = log(lambda) the log-objective
/// <q,u> - log sum_I exp(<1_I,u> + log(q_I d_I)) is concave; damped Newton
/// with backtracking finds its supremum. Unboundedness is decided first by
/// divergence_certificate. `warm_start` is an initial u.
LambdaResult optimize_lambda(const SubsetWeights& weights, const FlattenedExponents& q,
                             const LambdaConfig& config = {},
                             const Eigen::VectorXd* warm_start = nullptr);

/// sqrt of the supremum over rotations and lambda. Rank-one data skip the
/// rotation search.
OptimizeReport optimize_barthe(const BLDatum& datum, const SolverConfig& config = {});

/// Rank-one convenience: `vectors` holds v_1..v_m as columns of an n x m matrix.
double rank1_constant(const Eigen::MatrixXd& vectors, const std::vector<double>& p,
                      const LambdaConfig& config = {});

/// CSV with header "subset,d_I,q_I"; subsets are 1-based and dash-joined.
std::string weights_csv(const SubsetWeights& weights);

}  // namespace blc
