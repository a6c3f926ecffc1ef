#include "blc/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

namespace blc::linalg {

int numerical_rank(const Eigen::MatrixXd& a, double scale) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& sigma = svd.singularValues();
  const double reference = scale > 0.0 ? scale : (sigma.size() > 0 ? sigma(0) : 0.0);
  if (reference <= 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > kRankTolerance * reference) ++rank;
  }
  return rank;
}

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& columns) {
  if (columns.cols() == 0) return Eigen::MatrixXd(columns.rows(), 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(columns, Eigen::ComputeThinU);
  const int rank = numerical_rank(columns);
  return svd.matrixU().leftCols(rank);
}

Eigen::MatrixXd orthogonal_complement(const Eigen::MatrixXd& columns, int ambient) {
  if (columns.cols() == 0) return Eigen::MatrixXd::Identity(ambient, ambient);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(columns, Eigen::ComputeFullU);
  const int rank = numerical_rank(columns);
  return svd.matrixU().rightCols(ambient - rank);
}

double determinant(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("determinant of a non-square matrix");
  if (a.rows() == 0) return 1.0;
  return Eigen::PartialPivLU<Eigen::MatrixXd>(a).determinant();
}

Eigen::MatrixXd skew_from_parameters(std::span<const double> angles, int dim) {
  if (static_cast<int>(angles.size()) != rotation_parameter_count(dim)) {
    throw std::invalid_argument("expected " + std::to_string(rotation_parameter_count(dim)) +
                                " rotation parameters for dimension " + std::to_string(dim));
  }
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(dim, dim);
  std::size_t l = 0;
  for (int a = 0; a < dim; ++a) {
    for (int b = a + 1; b < dim; ++b) {
      s(b, a) = angles[l];
      s(a, b) = -angles[l];
      ++l;
    }
  }
  return s;
}

Eigen::MatrixXd rotation_from_parameters(std::span<const double> angles, int dim) {
  const Eigen::MatrixXd s = skew_from_parameters(angles, dim);
  if (dim == 1) return Eigen::MatrixXd::Ones(1, 1);
  if (dim == 2) {
    const double c = std::cos(angles[0]);
    const double sn = std::sin(angles[0]);
    Eigen::MatrixXd r(2, 2);
    r << c, -sn, sn, c;
    return r;
  }
  if (dim == 3) {
    // Rodrigues: exp(S) = I + sin(phi)/phi S + (1 - cos(phi))/phi^2 S^2.
    const double phi2 = angles[0] * angles[0] + angles[1] * angles[1] + angles[2] * angles[2];
    const double phi = std::sqrt(phi2);
    double a;
    double b;
    if (phi < 1e-4) {
      a = 1.0 - phi2 / 6.0 + phi2 * phi2 / 120.0;
      b = 0.5 - phi2 / 24.0 + phi2 * phi2 / 720.0;
    } else {
      a = std::sin(phi) / phi;
      b = (1.0 - std::cos(phi)) / phi2;
    }
    return Eigen::MatrixXd::Identity(3, 3) + a * s + b * (s * s);
  }
  return s.exp();
}

std::vector<Eigen::MatrixXd> rotation_derivatives(std::span<const double> angles, int dim) {
  const Eigen::MatrixXd s = skew_from_parameters(angles, dim);
  std::vector<Eigen::MatrixXd> out;
  if (dim == 2) {
    const double c = std::cos(angles[0]);
    const double sn = std::sin(angles[0]);
    Eigen::MatrixXd d(2, 2);
    d << -sn, -c, c, -sn;
    out.push_back(d);
    return out;
  }
  // exp([[S, E], [0, S]]) carries the Fréchet derivative of exp at S in
  // direction E in its upper-right block.
  std::size_t l = 0;
  for (int a = 0; a < dim; ++a) {
    for (int b = a + 1; b < dim; ++b) {
      Eigen::MatrixXd block = Eigen::MatrixXd::Zero(2 * dim, 2 * dim);
      block.topLeftCorner(dim, dim) = s;
      block.bottomRightCorner(dim, dim) = s;
      block(b, dim + a) = 1.0;
      block(a, dim + b) = -1.0;
      const Eigen::MatrixXd e = block.exp();
      out.push_back(e.topRightCorner(dim, dim));
      ++l;
    }
  }
  return out;
}

RotationParams RotationParams::identity(const std::vector<int>& dims) {
  RotationParams r;
  r.dims = dims;
  for (int d : dims) r.angles.emplace_back(static_cast<std::size_t>(rotation_parameter_count(d)), 0.0);
  return r;
}

int RotationParams::size() const {
  int total = 0;
  for (const auto& a : angles) total += static_cast<int>(a.size());
  return total;
}

Eigen::MatrixXd RotationParams::rotation(std::size_t i) const {
  return rotation_from_parameters(angles.at(i), dims.at(i));
}

Eigen::VectorXd RotationParams::flatten() const {
  Eigen::VectorXd flat(size());
  Eigen::Index k = 0;
  for (const auto& a : angles) {
    for (double x : a) flat(k++) = x;
  }
  return flat;
}

RotationParams RotationParams::unflatten(const std::vector<int>& dims, const Eigen::VectorXd& flat) {
  RotationParams r = identity(dims);
  if (flat.size() != r.size()) throw std::invalid_argument("rotation parameter count mismatch");
  Eigen::Index k = 0;
  for (auto& a : r.angles) {
    for (double& x : a) x = flat(k++);
  }
  return r;
}

Eigen::MatrixXd assemble_pd(const Eigen::VectorXd& eigenvalues, const Eigen::MatrixXd& rotation) {
  if (rotation.rows() != eigenvalues.size() || rotation.cols() != eigenvalues.size()) {
    throw std::invalid_argument("rotation and eigenvalue sizes differ");
  }
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    if (!(eigenvalues(i) > 0.0)) {
      throw std::invalid_argument("eigenvalue " + std::to_string(eigenvalues(i)) + " is not positive");
    }
  }
  Eigen::MatrixXd a = rotation.transpose() * eigenvalues.asDiagonal() * rotation;
  return 0.5 * (a + a.transpose());
}

Eigen::MatrixXd SpectralPD::assemble() const {
  return assemble_pd(eigenvalues,
                     rotation_from_parameters(angles, static_cast<int>(eigenvalues.size())));
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

std::vector<Subset> lexicographic_subsets(int count, int size) {
  std::vector<Subset> out;
  if (size < 0 || size > count) return out;
  out.reserve(binomial(count, size));
  Subset current(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) current[static_cast<std::size_t>(i)] = i;
  while (true) {
    out.push_back(current);
    int i = size - 1;
    while (i >= 0 && current[static_cast<std::size_t>(i)] == count - size + i) --i;
    if (i < 0) break;
    ++current[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < size; ++j) {
      current[static_cast<std::size_t>(j)] = current[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return out;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& columns, const Subset& subset) {
  Eigen::MatrixXd out(columns.rows(), static_cast<Eigen::Index>(subset.size()));
  for (std::size_t c = 0; c < subset.size(); ++c) {
    out.col(static_cast<Eigen::Index>(c)) = columns.col(subset[c]);
  }
  return out;
}

CauchyBinetExpansion cauchy_binet_det(const Eigen::MatrixXd& columns, const Eigen::VectorXd& weights) {
  const int n = static_cast<int>(columns.rows());
  const int k = static_cast<int>(columns.cols());
  if (n < 1) throw std::invalid_argument("Cauchy-Binet expansion needs n >= 1");
  if (weights.size() != k) throw std::invalid_argument("one weight per column is required");
  if (k < n) {
    throw std::invalid_argument("Cauchy-Binet expansion needs K >= n (K = " + std::to_string(k) +
                                ", n = " + std::to_string(n) + "): no n-subsets");
  }
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (!(weights(i) >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
  }
  CauchyBinetExpansion e;
  e.subsets = lexicographic_subsets(k, n);
  e.squared.reserve(e.subsets.size());
  for (const auto& subset : e.subsets) {
    const double det = determinant(select_columns(columns, subset));
    double w = 1.0;
    for (int idx : subset) w *= weights(idx);
    e.squared.push_back(det * det);
    e.total += w * det * det;
  }
  return e;
}

}  // namespace blc::linalg
