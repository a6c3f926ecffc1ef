#include <doctest.h>

#include <cmath>
#include <random>

#include "blc/barthe.hpp"
#include "blc/gaussian.hpp"
#include "oracles.hpp"

using namespace blc;

namespace {

BLDatum four_linear(double a) {
  FamilyParams fp;
  fp.a = a;
  return builtin_datum("four-linear", fp);
}

linalg::RotationParams trivial(const BLDatum& d) {
  std::vector<int> dims;
  for (const auto& map : d.maps) dims.push_back(map.target_dim());
  return linalg::RotationParams::identity(dims);
}

SubsetWeights weights_from(int n, const std::vector<double>& q, const std::vector<double>& d) {
  SubsetWeights w;
  w.K = static_cast<int>(q.size());
  w.n = n;
  const auto subsets = linalg::lexicographic_subsets(w.K, n);
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    double qi = 1.0;
    for (int k : subsets[i]) qi *= q[static_cast<std::size_t>(k)];
    w.entries.push_back({subsets[i], d[i], qi});
  }
  return w;
}

FlattenedExponents flat_q(const std::vector<double>& q) {
  FlattenedExponents f;
  f.K = static_cast<int>(q.size());
  f.q = Eigen::Map<const Eigen::VectorXd>(q.data(), f.K);
  for (int k = 0; k < f.K; ++k) f.index.emplace_back(k, 0);
  return f;
}

}  // namespace

TEST_CASE("flatten_exponents examples") {
  const auto y = flatten_exponents(builtin_datum("young"));
  CHECK(y.K == 3);
  for (int k = 0; k < 3; ++k) CHECK(y.q(k) == doctest::Approx(2.0 / 3.0));
  FamilyParams fp;
  fp.n = 3;
  const auto lw = flatten_exponents(builtin_datum("loomis-whitney", fp));
  CHECK(lw.K == 6);
  CHECK(lw.sum() == doctest::Approx(3.0));
  BLDatum mixed;
  mixed.n = 2;
  mixed.maps.push_back({0.25, Eigen::MatrixXd::Identity(2, 2)});
  mixed.maps.push_back({0.75, matrix_from_rows({{1, 1}})});
  const auto f = flatten_exponents(mixed);
  CHECK(f.K == 3);
  CHECK(f.q(0) == 0.25);
  CHECK(f.q(1) == 0.25);
  CHECK(f.q(2) == 0.75);
  CHECK(f.index[1] == std::pair<int, int>{0, 1});
  CHECK(f.index[2] == std::pair<int, int>{1, 0});
}

TEST_CASE("compute_dI examples") {
  const auto w = compute_dI(four_linear(1.0), trivial(four_linear(1.0)));
  const std::vector<double> expected{1, 1, 1, 1, 1, 4};
  REQUIRE(w.entries.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(w.entries[i].d == doctest::Approx(expected[i]));
    CHECK(w.entries[i].q == doctest::Approx(0.25));
  }
  CHECK(w.entries[5].subset == linalg::Subset{2, 3});

  FamilyParams fp;
  fp.n = 2;
  const BLDatum lw2 = builtin_datum("loomis-whitney", fp);
  const auto w2 = compute_dI(lw2, trivial(lw2));
  REQUIRE(w2.entries.size() == 1);
  CHECK(w2.entries[0].d == doctest::Approx(1.0));

  fp.n = 3;
  const BLDatum lw3 = builtin_datum("loomis-whitney", fp);
  const auto w3 = compute_dI(lw3, trivial(lw3));
  REQUIRE(w3.entries.size() == 20);
  int ones = 0;
  for (const auto& e : w3.entries) {
    const bool one = std::abs(e.d - 1.0) < 1e-12;
    CHECK((one || std::abs(e.d) < 1e-12));
    ones += one ? 1 : 0;
  }
  CHECK(ones == 8);

  BLDatum small;
  small.n = 3;
  small.maps.push_back({1.0, matrix_from_rows({{1, 0, 0}})});
  CHECK_THROWS_AS(compute_dI(small, trivial(small)), std::invalid_argument);
}

TEST_CASE("compute_dI matches cauchy-binet terms and rank-one determinants") {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> angle(0.0, 6.3);
  for (int trial = 0; trial < 50; ++trial) {
    BLDatum d;
    d.n = 3;
    for (int j = 0; j < 3; ++j) d.maps.push_back({0.5, oracle::random_matrix(rng, 1 + j % 2, 3)});
    linalg::RotationParams rot = trivial(d);
    for (auto& a : rot.angles)
      for (auto& x : a) x = angle(rng);
    const Eigen::MatrixXd v = flattened_vectors(d, rot);
    const auto w = compute_dI(d, rot);
    const auto cb = linalg::cauchy_binet_det(v, Eigen::VectorXd::Ones(v.cols()));
    REQUIRE(w.entries.size() == cb.squared.size());
    for (std::size_t i = 0; i < cb.squared.size(); ++i) CHECK(w.entries[i].d == cb.squared[i]);
  }
  for (int trial = 0; trial < 50; ++trial) {
    BLDatum d;
    d.n = 2;
    Eigen::MatrixXd raw = oracle::random_matrix(rng, 2, 4);
    for (int j = 0; j < 4; ++j) d.maps.push_back({0.5, raw.col(j).transpose()});
    const auto w = compute_dI(d, trivial(d));
    for (const auto& e : w.entries) {
      const double det = raw(0, e.subset[0]) * raw(1, e.subset[1]) - raw(1, e.subset[0]) * raw(0, e.subset[1]);
      CHECK(std::abs(e.d - det * det) <= 1e-12);
    }
  }
}

TEST_CASE("compute_dI is continuous in the rotations") {
  std::mt19937_64 rng(52);
  FamilyParams fp;
  fp.n = 3;
  const BLDatum lw = builtin_datum("loomis-whitney", fp);
  linalg::RotationParams rot = trivial(lw);
  std::uniform_real_distribution<double> angle(0.0, 6.3);
  for (auto& a : rot.angles)
    for (auto& x : a) x = angle(rng);
  const auto base = compute_dI(lw, rot);
  for (double eps : {1e-3, 1e-5, 1e-7}) {
    auto moved = rot;
    for (auto& a : moved.angles)
      for (auto& x : a) x += eps;
    const auto w = compute_dI(lw, moved);
    double worst = 0.0;
    for (std::size_t i = 0; i < w.entries.size(); ++i) worst = std::max(worst, std::abs(w.entries[i].d - base.entries[i].d));
    CHECK(worst < 50.0 * eps);
  }
}

TEST_CASE("barthe_objective examples") {
  FamilyParams fp;
  fp.n = 2;
  const BLDatum lw2 = builtin_datum("loomis-whitney", fp);
  CHECK(barthe_objective(compute_dI(lw2, trivial(lw2)), flatten_exponents(lw2), Eigen::Vector2d(1, 1)) ==
        doctest::Approx(1.0));
  const BLDatum fl = four_linear(1.0);
  const auto w = compute_dI(fl, trivial(fl));
  const auto q = flatten_exponents(fl);
  CHECK(barthe_objective(w, q, Eigen::Vector4d(2, 2, 1, 1)) == doctest::Approx(0.5));
  CHECK(barthe_objective(w, q, Eigen::Vector4d(1, 1, 1, 1)) == doctest::Approx(4.0 / 9.0));
  FamilyParams par;
  par.m = 2;
  const BLDatum pd = builtin_datum("parallel", par);
  CHECK(std::isinf(barthe_objective(compute_dI(pd, trivial(pd)), flatten_exponents(pd), Eigen::Vector2d(1, 1))));
}

TEST_CASE("barthe_objective is invariant under global lambda scaling") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> lg(-3.0, 3.0);
  const BLDatum fl = four_linear(0.3);
  const auto w = compute_dI(fl, trivial(fl));
  const auto q = flatten_exponents(fl);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd lambda(4);
    for (int k = 0; k < 4; ++k) lambda(k) = std::exp(lg(rng));
    const double base = barthe_objective(w, q, lambda);
    const double t = std::exp(lg(rng));
    CHECK(barthe_objective(w, q, t * lambda) == doctest::Approx(base).epsilon(1e-10));
  }
}

TEST_CASE("inner log-objective is midpoint concave") {
  std::mt19937_64 rng(54);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    BLDatum d;
    d.n = 2;
    for (int j = 0; j < 4; ++j) d.maps.push_back({0.5, oracle::random_matrix(rng, 1, 2)});
    const auto w = compute_dI(d, trivial(d));
    const auto q = flatten_exponents(d);
    Eigen::VectorXd a(4), b(4);
    for (int k = 0; k < 4; ++k) {
      a(k) = u(rng);
      b(k) = u(rng);
    }
    auto f = [&](const Eigen::VectorXd& x) { return std::log(barthe_objective(w, q, x.array().exp().matrix())); };
    CHECK(f(0.5 * (a + b)) >= 0.5 * (f(a) + f(b)) - 1e-10);
  }
}

TEST_CASE("optimize_lambda examples") {
  const BLDatum fl = four_linear(1.0);
  const auto r = optimize_lambda(compute_dI(fl, trivial(fl)), flatten_exponents(fl));
  REQUIRE(r.status == LambdaStatus::Optimal);
  CHECK(r.value == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(r.gradient_norm <= 1e-9);
  const Eigen::VectorXd ratio = r.lambda / r.lambda(3);
  CHECK(ratio(0) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(ratio(1) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(ratio(2) == doctest::Approx(1.0).epsilon(1e-6));

  FamilyParams fp;
  fp.n = 2;
  const BLDatum lw2 = builtin_datum("loomis-whitney", fp);
  CHECK(optimize_lambda(compute_dI(lw2, trivial(lw2)), flatten_exponents(lw2)).value == doctest::Approx(1.0));

  const auto unb = optimize_lambda(weights_from(2, {1, 1, 1}, {1, 1, 1}), flat_q({1, 1, 1}));
  REQUIRE(unb.status == LambdaStatus::Unbounded);
  REQUIRE(unb.direction);
  for (int k = 0; k < 3; ++k) CHECK(unb.direction->u(k) == doctest::Approx(1.0));
}

TEST_CASE("optimize_lambda converges when the value change is below rounding") {
  // n = 1: the maximum is prod_k d_k^{-q_k}, attained at lambda_k = 1 / d_k.
  const std::vector<double> q{0.088240270882681465, 0.35394271498136176, 0.39838206568425644,
                              0.15943494845170039};
  const std::vector<double> d{0.61653532594702265, 0.13539256928831017, 1.6372387051776143,
                              1.0845140951056076};
  const auto r = optimize_lambda(weights_from(1, q, d), flat_q(q));
  CHECK(r.status == LambdaStatus::Optimal);
  double expected = 1.0;
  for (std::size_t k = 0; k < q.size(); ++k) expected *= std::pow(d[k], -q[k]);
  CHECK(r.value == doctest::Approx(expected).epsilon(1e-12));

  const std::vector<double> q2{0.61985949507505422, 0.82574594966126236, 0.55439455526368353};
  const auto r2 = optimize_lambda(weights_from(2, q2, {1.2689380706365436, 1.1236147107919117, 1.4710998573141731}),
                                  flat_q(q2));
  CHECK(r2.status == LambdaStatus::Optimal);
  CHECK(r2.gradient_norm <= 1e-9);
}

TEST_CASE("optimize_lambda dominates sampled lambdas") {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> lg(-3.0, 3.0);
  for (int trial = 0; trial < 30; ++trial) {
    BLDatum d;
    d.n = 2;
    for (int j = 0; j < 4; ++j) d.maps.push_back({0.5, oracle::random_matrix(rng, 1, 2)});
    const auto w = compute_dI(d, trivial(d));
    const auto q = flatten_exponents(d);
    const auto r = optimize_lambda(w, q);
    REQUIRE(r.bounded());
    for (int k = 0; k < 50; ++k) {
      Eigen::VectorXd lambda(4);
      for (int i = 0; i < 4; ++i) lambda(i) = std::exp(lg(rng));
      CHECK(barthe_objective(w, q, lambda) <= r.value * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("semicontinuity bound on random weights") {
  std::mt19937_64 rng(56);
  std::uniform_real_distribution<double> wd(0.1, 2.0);
  std::uniform_real_distribution<double> sign(-1.0, 1.0);
  const std::vector<double> q{0.5, 0.5, 0.5, 0.5};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> base(6);
    for (auto& x : base) x = wd(rng);
    const double dmin = *std::min_element(base.begin(), base.end());
    const double delta = dmin * (0.05 + 0.4 * std::abs(sign(rng)));
    std::vector<double> moved = base;
    for (auto& x : moved) x += delta * (sign(rng) >= 0 ? 1.0 : -1.0);
    const double upper = optimize_lambda(weights_from(2, q, base), flat_q(q)).value / (1.0 - delta / dmin);
    CHECK(optimize_lambda(weights_from(2, q, moved), flat_q(q)).value <= upper + 1e-9);
  }
}

TEST_CASE("optimize_barthe examples") {
  for (double a : {-3.0, -0.5, 1.0}) {
    const auto r = optimize_barthe(four_linear(a));
    CHECK(r.finite());
    CHECK(std::abs(r.value - std::sqrt(2.0 / (std::abs(a) + std::abs(a + 1) + 1))) <= 1e-3);
  }
  CHECK(optimize_barthe(builtin_datum("holder")).value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(optimize_barthe(builtin_datum("young")).value - std::sqrt(3.0) / 2.0) <= 1e-4);
  FamilyParams fp;
  fp.n = 3;
  CHECK(std::abs(optimize_barthe(builtin_datum("loomis-whitney", fp)).value - 1.0) <= 1e-4);
}

TEST_CASE("optimize_barthe value is the gaussian ratio at its argument") {
  // Near-degenerate optimum: lambda spans eight orders of magnitude.
  const BLDatum hard = parse_datum_json(
      R"({"n":3,"maps":[{"p":0.36204994812575153,"matrix":[[0.75689871381303431,0.5648972108825614,0.70637741266959497],[-0.099329802442966408,-0.94730894283866884,0.44889914708986178]]},)"
      R"({"p":0.36200165101718978,"matrix":[[0.83363142520027633,0.23556568387113197,0.84359929940494638],[0.18056367961036868,0.64553632598678057,-0.19528427979030905]]},)"
      R"({"p":0.43712849091958866,"matrix":[[-0.0020134365078191552,-0.093935614467854811,-0.99747125537369752],[0.2272196042495922,-0.28545279719647176,-0.21384736591738651]]},)"
      R"({"p":0.33881990993746991,"matrix":[[0.47683344070710265,0.09133768117650698,0.093783664371332343],[0.10790863449408494,0.46150102870875243,-0.6618623957206341]]}]})");
  std::vector<BLDatum> data{hard};
  std::mt19937_64 rng(58);
  for (int trial = 0; trial < 5; ++trial) {
    BLDatum d;
    d.n = 3;
    for (int j = 0; j < 3; ++j) d.maps.push_back({0.5, oracle::random_matrix(rng, 2, 3)});
    data.push_back(d);
  }
  for (const auto& d : data) {
    const auto r = optimize_barthe(d);
    REQUIRE(r.finite());
    CHECK(r.value == doctest::Approx(gaussian_ratio(d, r.argument)).epsilon(1e-9));
  }
  CHECK(std::abs(optimize_barthe(hard).value / optimize_lieb(hard).value - 1.0) <= 1e-6);
}

TEST_CASE("optimize_barthe is deterministic given the seed") {
  BLDatum d;
  d.n = 3;
  std::mt19937_64 rng(57);
  for (int j = 0; j < 3; ++j) d.maps.push_back({0.5, oracle::random_matrix(rng, 2, 3)});
  SolverConfig cfg;
  cfg.starts = 3;
  cfg.seed = 5;
  const auto a = optimize_barthe(d, cfg);
  const auto b = optimize_barthe(d, cfg);
  CHECK(a.value == b.value);
  CHECK(a.best_start == b.best_start);
}

TEST_CASE("rank1_constant") {
  CHECK(rank1_constant(Eigen::Matrix2d::Identity(), {1, 1}) == doctest::Approx(1.0));
  Eigen::MatrixXd v(2, 4);
  v << 1, 0, 1, 1, 0, 1, -1, 1;
  const double c = rank1_constant(v, {0.5, 0.5, 0.5, 0.5});
  CHECK(std::abs(c - std::sqrt(0.5)) <= 1e-6);
  Eigen::Matrix<double, 2, 4> fixed = v;
  CHECK(c == doctest::Approx(oracle::four_vector_constant(fixed)).epsilon(1e-8));
  CHECK(std::abs(c - optimize_barthe(four_linear(1.0)).value) <= 1e-9);
}

TEST_CASE("rank1_constant matches the four-vector closed form") {
  std::mt19937_64 rng(58);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Matrix<double, 2, 4> v = oracle::random_matrix(rng, 2, 4);
    CHECK(rank1_constant(v, {0.5, 0.5, 0.5, 0.5}) == doctest::Approx(oracle::four_vector_constant(v)).epsilon(1e-6));
  }
}

TEST_CASE("weights csv") {
  const BLDatum fl = four_linear(1.0);
  const std::string csv = weights_csv(compute_dI(fl, trivial(fl)));
  CHECK(csv.rfind("subset,d_I,q_I\n", 0) == 0);
  CHECK(csv.find("\n1-2,1,0.25\n") != std::string::npos);
  CHECK(csv.find("\n3-4,") != std::string::npos);
}
