#include <doctest.h>

#include <numbers>
#include <random>

#include "blc/linalg.hpp"
#include "oracles.hpp"

using namespace blc::linalg;

TEST_CASE("rotation examples") {
  CHECK(rotation_from_parameters({}, 1).isApprox(Eigen::MatrixXd::Identity(1, 1)));
  const std::vector<double> zero{0.0};
  CHECK(rotation_from_parameters(zero, 2).isApprox(Eigen::MatrixXd::Identity(2, 2)));
  const std::vector<double> quarter{std::numbers::pi / 2};
  const Eigen::MatrixXd r = rotation_from_parameters(quarter, 2);
  CHECK(r(0, 0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  CHECK(r(0, 1) == doctest::Approx(-1.0));
  CHECK(r(1, 0) == doctest::Approx(1.0));
  CHECK(r(1, 1) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
}

TEST_CASE("rotations are orthogonal with determinant one") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> angle(-7.0, 7.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int dim = 1 + trial % 4;
    std::vector<double> a(static_cast<std::size_t>(rotation_parameter_count(dim)));
    for (auto& x : a) x = angle(rng);
    const Eigen::MatrixXd r = rotation_from_parameters(a, dim);
    const double err = (r.transpose() * r - Eigen::MatrixXd::Identity(dim, dim)).cwiseAbs().maxCoeff();
    CHECK(err <= 1e-12);
    CHECK(std::abs(r.determinant() - 1.0) <= 1e-12);
  }
}

TEST_CASE("closed-form rotations agree with the series exponential") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> angle(-3.0, 3.0);
  for (int dim : {2, 3}) {
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> a(static_cast<std::size_t>(rotation_parameter_count(dim)));
      for (auto& x : a) x = trial < 20 ? 1e-6 * angle(rng) : angle(rng);
      const Eigen::MatrixXd s = skew_from_parameters(a, dim);
      // Taylor series after scaling by 2^-8, then squaring.
      Eigen::MatrixXd small = s / 256.0;
      Eigen::MatrixXd term = Eigen::MatrixXd::Identity(dim, dim);
      Eigen::MatrixXd e = term;
      for (int k = 1; k < 25; ++k) {
        term = term * small / k;
        e += term;
      }
      for (int k = 0; k < 8; ++k) e = e * e;
      CHECK((rotation_from_parameters(a, dim) - e).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("rotation derivatives match finite differences") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> angle(-3.0, 3.0);
  for (int dim = 2; dim <= 4; ++dim) {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> a(static_cast<std::size_t>(rotation_parameter_count(dim)));
      for (auto& x : a) x = angle(rng);
      const auto derivs = rotation_derivatives(a, dim);
      REQUIRE(derivs.size() == a.size());
      for (std::size_t l = 0; l < a.size(); ++l) {
        auto plus = a;
        auto minus = a;
        plus[l] += 1e-6;
        minus[l] -= 1e-6;
        const Eigen::MatrixXd fd =
            (rotation_from_parameters(plus, dim) - rotation_from_parameters(minus, dim)) / 2e-6;
        CHECK((fd - derivs[l]).cwiseAbs().maxCoeff() < 1e-7);
      }
    }
  }
}

TEST_CASE("assemble_pd examples") {
  const Eigen::Vector2d ones(1, 1);
  const std::vector<double> any{0.7};
  CHECK(assemble_pd(ones, rotation_from_parameters(any, 2)).isApprox(Eigen::Matrix2d::Identity()));
  const Eigen::Vector2d d(4, 1);
  CHECK(assemble_pd(d, Eigen::Matrix2d::Identity()).isApprox(Eigen::Vector2d(4, 1).asDiagonal().toDenseMatrix()));
  Eigen::Matrix2d expected;
  expected << 2.5, 1.5, 1.5, 2.5;
  // R^T D R with R the rotation by -pi/4 under the counter-clockwise convention.
  const std::vector<double> eighth{-std::numbers::pi / 4};
  CHECK((assemble_pd(d, rotation_from_parameters(eighth, 2)) - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(assemble_pd(Eigen::Vector2d(1, 0), Eigen::Matrix2d::Identity()), std::invalid_argument);
  CHECK_THROWS_AS(assemble_pd(Eigen::Vector2d(1, -2), Eigen::Matrix2d::Identity()), std::invalid_argument);
}

TEST_CASE("assemble_pd preserves the spectrum") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> logeig(-5.0, 5.0);
  std::uniform_real_distribution<double> angle(0.0, 6.3);
  for (int trial = 0; trial < 300; ++trial) {
    const int dim = 1 + trial % 4;
    Eigen::VectorXd eig(dim);
    for (int i = 0; i < dim; ++i) eig(i) = std::exp(logeig(rng));
    std::vector<double> a(static_cast<std::size_t>(rotation_parameter_count(dim)));
    for (auto& x : a) x = angle(rng);
    const Eigen::MatrixXd m = assemble_pd(eig, rotation_from_parameters(a, dim));
    CHECK((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * eig.maxCoeff());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    Eigen::VectorXd sorted = eig;
    std::sort(sorted.data(), sorted.data() + dim);
    CHECK(es.eigenvalues().minCoeff() >= (1.0 - 1e-9) * sorted(0));
    for (int i = 0; i < dim; ++i) {
      CHECK(std::abs(es.eigenvalues()(i) - sorted(i)) <= 1e-9 * sorted(i) + 1e-12 * sorted(dim - 1));
    }
  }
}

TEST_CASE("subsets are lexicographic") {
  const auto s = lexicographic_subsets(4, 2);
  REQUIRE(s.size() == 6);
  CHECK(s[0] == Subset{0, 1});
  CHECK(s[1] == Subset{0, 2});
  CHECK(s[2] == Subset{0, 3});
  CHECK(s[3] == Subset{1, 2});
  CHECK(s[5] == Subset{2, 3});
  CHECK(binomial(20, 10) == 184756);
  CHECK(lexicographic_subsets(7, 3).size() == binomial(7, 3));
}

TEST_CASE("cauchy-binet examples") {
  Eigen::MatrixXd v(2, 3);
  v << 1, 0, 1, 0, 1, 1;
  const auto e = cauchy_binet_det(v, Eigen::Vector3d::Ones());
  CHECK(e.total == doctest::Approx(3.0));
  REQUIRE(e.squared.size() == 3);
  CHECK(e.squared[0] == doctest::Approx(1.0));
  CHECK(e.squared[1] == doctest::Approx(1.0));
  CHECK(e.squared[2] == doctest::Approx(1.0));

  for (int n = 1; n <= 4; ++n) {
    CHECK(cauchy_binet_det(Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Ones(n)).total ==
          doctest::Approx(1.0));
  }

  Eigen::MatrixXd fl(2, 4);
  fl << 1, 0, 1, 1, 0, 1, -1, 1;
  const auto f = cauchy_binet_det(fl, Eigen::Vector4d::Ones());
  const std::vector<double> expected{1, 1, 1, 1, 1, 4};
  REQUIRE(f.squared.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(f.squared[i] == doctest::Approx(expected[i]));

  CHECK_THROWS_AS(cauchy_binet_det(Eigen::MatrixXd::Identity(3, 2), Eigen::Vector2d::Ones()),
                  std::invalid_argument);
}

TEST_CASE("cauchy-binet matches the direct determinant") {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> nd(1, 4);
  std::uniform_real_distribution<double> wd(0.0, 2.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = nd(rng);
    const int k = std::uniform_int_distribution<int>(n, 8)(rng);
    const Eigen::MatrixXd v = oracle::random_matrix(rng, n, k);
    Eigen::VectorXd w(k);
    for (int i = 0; i < k; ++i) {
      double x = 0.0;
      while (x == 0.0) x = wd(rng);
      w(i) = x;
    }
    const double direct = oracle::direct_gram_det(v, w);
    const double total = cauchy_binet_det(v, w).total;
    CHECK(std::abs(total - direct) <= 1e-10 * std::abs(direct) + 1e-300);
  }
}

TEST_CASE("numerical rank") {
  CHECK(numerical_rank(Eigen::MatrixXd::Zero(2, 2)) == 0);
  Eigen::MatrixXd a(2, 2);
  a << 1, 2, 2, 4 + 1e-14;
  CHECK(numerical_rank(a) == 1);
  a << 1e-20, 0, 0, 2e-20;
  CHECK(numerical_rank(a) == 2);
  CHECK(numerical_rank(a, 1.0) == 0);
  Eigen::MatrixXd cols(3, 1);
  cols << 1, 1, 0;
  const Eigen::MatrixXd comp = orthogonal_complement(cols, 3);
  CHECK(comp.cols() == 2);
  CHECK((comp.transpose() * cols).norm() < 1e-12);
  CHECK(determinant(Eigen::Matrix3d::Identity() * 2.0) == doctest::Approx(8.0));
}

TEST_CASE("rotation params flatten round trip") {
  const std::vector<int> dims{1, 2, 3};
  const RotationParams id = RotationParams::identity(dims);
  CHECK(id.size() == 0 + 1 + 3);
  Eigen::VectorXd flat(4);
  flat << 0.1, 0.2, 0.3, 0.4;
  const RotationParams r = RotationParams::unflatten(dims, flat);
  CHECK(r.flatten() == flat);
  CHECK(r.rotation(0).isApprox(Eigen::MatrixXd::Identity(1, 1)));
}
