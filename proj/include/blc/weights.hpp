#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "blc/linalg.hpp"

namespace blc {

/// Flattened index k <-> (map i, target coordinate j) with q_k = p_i.
struct FlattenedExponents {
  int K = 0;
  Eigen::VectorXd q;
  std::vector<std::pair<int, int>> index;  // k -> (i, j), zero based

  double sum() const { return q.sum(); }
};

struct SubsetWeight {
  linalg::Subset subset;  // zero-based, increasing
  double d = 0.0;         // squared determinant of the selected columns
  double q = 0.0;         // product of q_k over the subset
};

/// d_I and q_I over all n-subsets of {1..K}, lexicographic.
struct SubsetWeights {
  int K = 0;
  int n = 0;
  std::vector<SubsetWeight> entries;
};

}  // namespace blc
