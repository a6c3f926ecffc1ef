#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace blc::linalg {

/// Singular values below this fraction of the reference scale count as zero.
inline constexpr double kRankTolerance = 1e-10;

/// Numerical rank of `a`. The threshold is kRankTolerance * scale, where scale
/// defaults to the largest singular value of `a` itself.
int numerical_rank(const Eigen::MatrixXd& a, double scale = -1.0);

/// Orthonormal basis (as columns) for the column span of `columns`.
Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& columns);

/// Orthonormal basis for the orthogonal complement of the column span.
Eigen::MatrixXd orthogonal_complement(const Eigen::MatrixXd& columns, int ambient);

/// LU with partial pivoting.
double determinant(const Eigen::MatrixXd& a);

inline int rotation_parameter_count(int dim) { return dim * (dim - 1) / 2; }

/// Skew-symmetric generator. Parameters run over pairs (a, b), a < b, in
/// row-major order; S(b, a) = theta and S(a, b) = -theta, so in dimension 2
/// the parameter is the counter-clockwise rotation angle.
Eigen::MatrixXd skew_from_parameters(std::span<const double> angles, int dim);

/// exp(S) for the generator above. Closed form for dim <= 3, Padé
/// scaling-and-squaring otherwise.
Eigen::MatrixXd rotation_from_parameters(std::span<const double> angles, int dim);

/// d exp(S) / d angle_l for every parameter l (Fréchet derivative of exp).
std::vector<Eigen::MatrixXd> rotation_derivatives(std::span<const double> angles, int dim);

/// Rotation parameters for every map of a datum.
struct RotationParams {
  std::vector<int> dims;
  std::vector<std::vector<double>> angles;

  static RotationParams identity(const std::vector<int>& dims);
  /// Total number of scalar parameters.
  int size() const;
  Eigen::MatrixXd rotation(std::size_t i) const;
  Eigen::VectorXd flatten() const;
  static RotationParams unflatten(const std::vector<int>& dims, const Eigen::VectorXd& flat);
};

/// R* D R with D = diag(eigenvalues). Throws std::invalid_argument if an
/// eigenvalue is not strictly positive.
Eigen::MatrixXd assemble_pd(const Eigen::VectorXd& eigenvalues, const Eigen::MatrixXd& rotation);

/// A positive definite matrix in spectral form.
struct SpectralPD {
  Eigen::VectorXd eigenvalues;
  std::vector<double> angles;

  Eigen::MatrixXd assemble() const;
};

using Subset = std::vector<int>;

/// Number of k-subsets of an n-set. Exact for the sizes used here.
std::uint64_t binomial(int n, int k);

/// All `size`-subsets of {0, ..., count-1} in lexicographic order.
std::vector<Subset> lexicographic_subsets(int count, int size);

/// Columns `subset` of `columns` as a square matrix.
Eigen::MatrixXd select_columns(const Eigen::MatrixXd& columns, const Subset& subset);

struct CauchyBinetExpansion {
  double total = 0.0;            // det(sum_k w_k v_k v_k^T)
  std::vector<Subset> subsets;   // lexicographic
  std::vector<double> squared;   // det((v_k)_{k in I})^2, aligned with subsets
};

/// Expands det(sum_k w_k v_k v_k^T) over all n-subsets of the K columns of
/// `columns` (an n x K matrix). Throws std::invalid_argument when K < n.
CauchyBinetExpansion cauchy_binet_det(const Eigen::MatrixXd& columns, const Eigen::VectorXd& weights);

}  // namespace blc::linalg
