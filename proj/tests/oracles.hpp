#pragma once

// Reference computations that do not go through the library's own kernels.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "blc/datum.hpp"

namespace oracle {

// det(sum_k w_k v_k v_k^T) assembled and factored directly.
inline double direct_gram_det(const Eigen::MatrixXd& columns, const Eigen::VectorXd& w) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(columns.rows(), columns.rows());
  for (Eigen::Index k = 0; k < columns.cols(); ++k) m += w(k) * columns.col(k) * columns.col(k).transpose();
  return m.fullPivLu().determinant();
}

// Rank by full-pivot LU, counting pivots above 1e-10 * scale. Independent
// of the SVD path used by the library.
inline int rank_lu(const Eigen::MatrixXd& a, double scale) {
  if (a.size() == 0) return 0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  const Eigen::MatrixXd& u = lu.matrixLU();
  int r = 0;
  for (Eigen::Index i = 0; i < std::min(a.rows(), a.cols()); ++i) {
    if (std::abs(u(i, i)) > 1e-10 * scale) ++r;
  }
  return r;
}

inline int rank_lu(const Eigen::MatrixXd& a) { return rank_lu(a, a.cwiseAbs().maxCoeff()); }

inline double subspace_defect(const blc::BLDatum& d, const Eigen::MatrixXd& basis) {
  const Eigen::MatrixXd q = basis.colPivHouseholderQr().householderQ() *
                            Eigen::MatrixXd::Identity(basis.rows(), rank_lu(basis));
  double sum = 0.0;
  for (const auto& map : d.maps) sum += map.p * rank_lu(map.matrix * q, map.matrix.cwiseAbs().maxCoeff());
  return q.cols() - sum;
}

inline double scaling_defect(const blc::BLDatum& d) {
  double s = -static_cast<double>(d.n);
  for (const auto& map : d.maps) s += map.p * static_cast<double>(map.matrix.rows());
  return s;
}

// Young datum with scalar A = (a1, a2, a3): rows (1,0), (0,1), (1,-1), p = 2/3.
// M = (2/3) [[a1 + a3, -a3], [-a3, a2 + a3]], det M = (4/9)(a1 a2 + a1 a3 + a2 a3).
inline double young_scalar_ratio(double a1, double a2, double a3) {
  return std::cbrt(a1 * a2 * a3) / ((2.0 / 3.0) * std::sqrt(a1 * a2 + a1 * a3 + a2 * a3));
}

// min{1, |a|^{-1/2}, |a+1|^{-1/2}} written out case by case.
inline double four_linear_min_form(double a) {
  double v = 1.0;
  if (std::abs(a) > 1.0) v = std::min(v, 1.0 / std::sqrt(std::abs(a)));
  if (std::abs(a + 1.0) > 1.0) v = std::min(v, 1.0 / std::sqrt(std::abs(a + 1.0)));
  return v;
}

// Square root of 2 / sum of the three products of pairwise determinants.
inline double four_vector_constant(const Eigen::Matrix<double, 2, 4>& v) {
  auto det = [&](int i, int j) { return v(0, i) * v(1, j) - v(1, i) * v(0, j); };
  const double s = std::abs(det(0, 1) * det(2, 3)) + std::abs(det(0, 2) * det(1, 3)) +
                   std::abs(det(0, 3) * det(1, 2));
  return std::sqrt(2.0 / s);
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols, double lo = -1.0,
                                     double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

inline Eigen::MatrixXd random_spd(std::mt19937_64& rng, int dim) {
  const Eigen::MatrixXd b = random_matrix(rng, dim, dim);
  return b * b.transpose() + 0.2 * Eigen::MatrixXd::Identity(dim, dim);
}

// Generic data: with generic maps, every subspace condition is strict as soon
// as sum_j p_j min(n_j, dim V) > dim V for 0 < dim V < n.
inline bool generic_interior(int n, const std::vector<int>& dims, const std::vector<double>& p,
                             double margin) {
  for (int k = 1; k < n; ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < dims.size(); ++j) s += p[j] * std::min(dims[j], k);
    if (s < k + margin) return false;
  }
  return true;
}

}  // namespace oracle
