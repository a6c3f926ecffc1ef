#include "blc/barthe.hpp"

#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

#include "blc/ascent.hpp"

namespace blc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Central-difference step for d_I in the rotation parameters.
constexpr double kRotationStep = 1e-5;
// A stalled outer ascent still counts as converged below this gradient; the
// envelope gradient inherits the inner solver's tolerance.
constexpr double kOuterStationarity = 1e-6;
// BL above 1e9, i.e. the squared objective above 1e18.
const double kLogDivergence = std::log(1e18);

}  // namespace

FlattenedExponents flatten_exponents(const BLDatum& datum) {
  FlattenedExponents f;
  f.K = datum.total_rank();
  f.q.resize(f.K);
  int k = 0;
  for (int i = 0; i < datum.m(); ++i) {
    const auto& map = datum.maps[static_cast<std::size_t>(i)];
    for (int j = 0; j < map.target_dim(); ++j) {
      f.q(k++) = map.p;
      f.index.emplace_back(i, j);
    }
  }
  return f;
}

Eigen::MatrixXd flattened_vectors(const BLDatum& datum, const linalg::RotationParams& rotations) {
  if (rotations.angles.size() != datum.maps.size()) {
    throw std::invalid_argument("one rotation per map is required");
  }
  Eigen::MatrixXd v(datum.n, datum.total_rank());
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < datum.maps.size(); ++i) {
    const auto& map = datum.maps[i];
    if (rotations.dims[i] != map.target_dim()) {
      throw std::invalid_argument("rotation " + std::to_string(i) + " has the wrong dimension");
    }
    // Row j of R_i L_i is (L_i^T R_i^T e_j)^T.
    const Eigen::MatrixXd rl = rotations.rotation(i) * map.matrix;
    for (Eigen::Index j = 0; j < rl.rows(); ++j) v.col(k++) = rl.row(j).transpose();
  }
  return v;
}

SubsetWeights compute_dI(const BLDatum& datum, const linalg::RotationParams& rotations) {
  const FlattenedExponents f = flatten_exponents(datum);
  if (f.K < datum.n) {
    throw std::invalid_argument("K = " + std::to_string(f.K) + " < n = " + std::to_string(datum.n) +
                                ": scaling cannot hold and there are no n-subsets");
  }
  if (f.K > kMaxFlattenedDimension) {
    throw std::invalid_argument("K = " + std::to_string(f.K) + " exceeds the enumeration cap of " +
                                std::to_string(kMaxFlattenedDimension));
  }
  const Eigen::MatrixXd v = flattened_vectors(datum, rotations);
  const auto expansion = linalg::cauchy_binet_det(v, Eigen::VectorXd::Ones(f.K));
  SubsetWeights w;
  w.K = f.K;
  w.n = datum.n;
  w.entries.reserve(expansion.subsets.size());
  for (std::size_t s = 0; s < expansion.subsets.size(); ++s) {
    double q = 1.0;
    for (int k : expansion.subsets[s]) q *= f.q(k);
    w.entries.push_back({expansion.subsets[s], expansion.squared[s], q});
  }
  return w;
}

double barthe_objective(const SubsetWeights& weights, const FlattenedExponents& q,
                        const Eigen::VectorXd& lambda) {
  if (lambda.size() != q.K || weights.K != q.K) throw std::invalid_argument("lambda must have K entries");
  if ((lambda.array() <= 0.0).any()) throw std::invalid_argument("lambda must be positive");
  const double log_num = (q.q.array() * lambda.array().log()).sum();
  double denom = 0.0;
  for (const auto& e : weights.entries) {
    double lam = 1.0;
    for (int k : e.subset) lam *= lambda(k);
    denom += lam * e.q * e.d;
  }
  if (denom <= 1e-300) return kInf;
  return std::exp(log_num) / denom;
}

std::string to_string(LambdaStatus status) {
  switch (status) {
    case LambdaStatus::Optimal:
      return "optimal";
    case LambdaStatus::NotConverged:
      return "not converged";
    case LambdaStatus::Unbounded:
      return "unbounded";
    case LambdaStatus::IdenticallyInfinite:
      return "identically infinite";
  }
  return "?";
}

namespace {

// Log-objective phi(u) = <q,u> - log sum_I exp(<1_I,u> + c_I) over every subset
// with q_I d_I > 0. The support threshold only shapes the boundedness LP; tiny
// minors still count here, or the outer ascent learns to hide mass in them.
class LogObjective {
 public:
  LogObjective(const SubsetWeights& weights, const FlattenedExponents& q) : q_(q.q), K_(q.K) {
    for (const auto& e : weights.entries) {
      const double w = e.q * e.d;
      if (w > 0.0) {
        subsets_.push_back(&e.subset);
        offsets_.push_back(std::log(w));
      }
    }
  }

  double value(const Eigen::VectorXd& u) const {
    double amax = -kInf;
    std::vector<double> a(subsets_.size());
    for (std::size_t s = 0; s < subsets_.size(); ++s) {
      double x = offsets_[s];
      for (int k : *subsets_[s]) x += u(k);
      a[s] = x;
      amax = std::max(amax, x);
    }
    double sum = 0.0;
    for (double x : a) sum += std::exp(x - amax);
    return q_.dot(u) - (amax + std::log(sum));
  }

  double evaluate(const Eigen::VectorXd& u, Eigen::VectorXd& gradient, Eigen::MatrixXd& covariance) const {
    std::vector<double> a(subsets_.size());
    double amax = -kInf;
    for (std::size_t s = 0; s < subsets_.size(); ++s) {
      double x = offsets_[s];
      for (int k : *subsets_[s]) x += u(k);
      a[s] = x;
      amax = std::max(amax, x);
    }
    double sum = 0.0;
    for (double& x : a) {
      x = std::exp(x - amax);
      sum += x;
    }
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(K_);
    covariance.setZero(K_, K_);
    for (std::size_t s = 0; s < subsets_.size(); ++s) {
      const double w = a[s] / sum;
      const auto& idx = *subsets_[s];
      for (int k : idx) {
        mean(k) += w;
        for (int l : idx) covariance(k, l) += w;
      }
    }
    covariance -= mean * mean.transpose();
    gradient = q_ - mean;
    return q_.dot(u) - (amax + std::log(sum));
  }

 private:
  Eigen::VectorXd q_;
  int K_;
  std::vector<const linalg::Subset*> subsets_;
  std::vector<double> offsets_;
};

}  // namespace

LambdaResult optimize_lambda(const SubsetWeights& weights, const FlattenedExponents& q,
                             const LambdaConfig& config, const Eigen::VectorXd* warm_start) {
  LambdaResult r;
  const DivergenceCheck check = divergence_certificate(weights, q);
  if (check.kind == DivergenceCheck::Kind::IdenticallyInfinite) {
    r.status = LambdaStatus::IdenticallyInfinite;
    r.value = r.log_value = kInf;
    return r;
  }
  if (check.kind == DivergenceCheck::Kind::Divergent) {
    r.status = LambdaStatus::Unbounded;
    r.value = r.log_value = kInf;
    r.direction = check.direction;
    return r;
  }

  const int K = q.K;
  const LogObjective phi(weights, q);
  // The objective is invariant along the all-ones direction exactly when
  // sum_k q_k = n; fix that gauge with <q,u> = 0.
  const double mass = q.sum();
  const bool gauge = std::abs(mass - weights.n) <= 1e-12 * std::max(1.0, mass) && mass > 0.0;
  auto project = [&](Eigen::VectorXd& v) {
    if (gauge) v.array() -= q.q.dot(v) / mass;
  };

  Eigen::VectorXd u = (warm_start != nullptr && warm_start->size() == K) ? *warm_start
                                                                         : Eigen::VectorXd::Zero(K);
  project(u);
  Eigen::VectorXd g(K);
  Eigen::MatrixXd cov(K, K);
  double value = phi.evaluate(u, g, cov);
  double damping = 1e-12;
  while (true) {
    r.gradient_norm = g.cwiseAbs().maxCoeff();
    if (r.gradient_norm <= config.tol) {
      r.status = LambdaStatus::Optimal;
      break;
    }
    if (r.iterations >= config.max_iter) {
      r.status = LambdaStatus::NotConverged;
      break;
    }
    const double scale = 1.0 + cov.trace();
    Eigen::MatrixXd system = cov;
    system.diagonal().array() += damping * scale;
    Eigen::VectorXd d = system.ldlt().solve(g);
    project(d);
    double slope = g.dot(d);
    if (!(slope > 0.0) || !d.allFinite()) {
      d = g;
      project(d);
      slope = g.dot(d);
    }
    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd trial;
    double trial_value = 0.0;
    for (int ls = 0; ls < 60; ++ls) {
      trial = u + step * d;
      trial_value = phi.value(trial);
      if (trial_value >= value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      // Near the maximum the value change drops below rounding; judge the
      // full step by the gradient instead.
      if (ls == 0 && std::abs(trial_value - value) <= 1e-13 * (1.0 + std::abs(value))) {
        Eigen::VectorXd tg(K);
        Eigen::MatrixXd tc(K, K);
        phi.evaluate(trial, tg, tc);
        if (tg.cwiseAbs().maxCoeff() < 0.5 * r.gradient_norm) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (damping < 1e2) {
        damping *= 1e4;
        continue;
      }
      r.status = LambdaStatus::NotConverged;
      break;
    }
    damping = std::max(1e-12, damping * 1e-2);
    project(trial);
    u = std::move(trial);
    value = phi.evaluate(u, g, cov);
    ++r.iterations;
  }
  r.log_value = value;
  r.value = std::exp(value);
  r.lambda = u.array().exp();
  return r;
}

namespace {

struct InnerUnbounded {
  LambdaResult result;
};

struct BartheStart {
  AscentResult ascent;
  std::optional<LambdaResult> unbounded;
  int index = 0;
};

GaussianInput gaussian_from(const BLDatum& datum, const linalg::RotationParams& rotations,
                            const Eigen::VectorXd& lambda) {
  GaussianInput in;
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < datum.maps.size(); ++i) {
    const int ni = datum.maps[i].target_dim();
    in.matrices.push_back(linalg::assemble_pd(lambda.segment(k, ni), rotations.rotation(i)));
    k += ni;
  }
  return in;
}

OptimizeReport infinite_report(const LambdaResult& inner) {
  OptimizeReport report;
  report.method = "barthe";
  report.outcome = Outcome::Infinite;
  report.value = kInf;
  report.divergence = inner.direction;
  report.note = inner.status == LambdaStatus::IdenticallyInfinite
                    ? "objective identically infinite: every q_I d_I vanishes"
                    : "objective unbounded along a log-lambda ray";
  return report;
}

}  // namespace

OptimizeReport optimize_barthe(const BLDatum& datum, const SolverConfig& config) {
  if (config.starts < 1) throw std::invalid_argument("starts must be >= 1");
  require_valid(datum);
  const FlattenedExponents q = flatten_exponents(datum);
  if (q.K < datum.n) {
    OptimizeReport report;
    report.method = "barthe";
    report.outcome = Outcome::Infinite;
    report.value = kInf;
    FinitenessVerdict verdict;
    verdict.status = FinitenessStatus::Infinite;
    FinitenessCertificate cert;
    cert.scaling = true;
    cert.scaling_defect = scaling_defect(datum);
    cert.basis = Eigen::MatrixXd::Identity(datum.n, datum.n);
    cert.defect = -cert.scaling_defect;
    verdict.certificate = cert;
    report.verdict = verdict;
    report.note = "K < n: scaling cannot hold";
    return report;
  }
  if (q.K > kMaxFlattenedDimension) {
    throw std::invalid_argument("barthe: K = " + std::to_string(q.K) + " exceeds the cap of " +
                                std::to_string(kMaxFlattenedDimension) + "; use the lieb method");
  }

  std::vector<int> dims;
  for (const auto& map : datum.maps) dims.push_back(map.target_dim());
  const LambdaConfig inner_config{std::max(config.max_iter, 500), 1e-9};

  const int params = linalg::RotationParams::identity(dims).size();
  if (params == 0) {
    const auto rotations = linalg::RotationParams::identity(dims);
    const LambdaResult inner = optimize_lambda(compute_dI(datum, rotations), q, inner_config);
    if (!inner.bounded()) return infinite_report(inner);
    OptimizeReport report;
    report.method = "barthe";
    report.starts_used = 1;
    report.best_start = 0;
    report.iterations = inner.iterations;
    report.gradient_norm = inner.gradient_norm;
    report.converged = inner.status == LambdaStatus::Optimal;
    if (inner.log_value > kLogDivergence) {
      report.outcome = Outcome::ApparentlyUnbounded;
      report.value = kInf;
      return report;
    }
    report.value = std::exp(0.5 * inner.log_value);
    report.argument = gaussian_from(datum, rotations, inner.lambda);
    return report;
  }

  auto run = [&](int start) -> BartheStart {
    BartheStart out;
    out.index = start;
    Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(params);
    if (start > 0) {
      std::mt19937_64 rng(config.seed ^ static_cast<std::uint64_t>(start));
      std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
      for (Eigen::Index i = 0; i < params; ++i) theta0(i) = angle(rng);
    }
    Eigen::VectorXd warm;
    auto inner_at = [&](const Eigen::VectorXd& theta, const Eigen::VectorXd* seed_u) {
      const auto rotations = linalg::RotationParams::unflatten(dims, theta);
      LambdaResult r = optimize_lambda(compute_dI(datum, rotations), q, inner_config, seed_u);
      if (!r.bounded()) throw InnerUnbounded{r};
      return r;
    };
    // Envelope theorem: at the inner maximizer u, the derivative in theta is
    // -sum_I pi_I d'_I / d_I with pi_I the softmax weights, i.e.
    // -sum_I e^{<1_I,u>} q_I d'_I / sum_I e^{<1_I,u>} q_I d_I.
    const Objective objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd* gradient) {
      const LambdaResult base = inner_at(theta, warm.size() ? &warm : nullptr);
      const Eigen::VectorXd u = base.lambda.array().log();
      if (gradient != nullptr) {
        const SubsetWeights at = compute_dI(datum, linalg::RotationParams::unflatten(dims, theta));
        std::vector<double> logs(at.entries.size());
        double amax = -kInf;
        for (std::size_t s = 0; s < at.entries.size(); ++s) {
          double x = std::log(at.entries[s].q);
          for (int k : at.entries[s].subset) x += u(k);
          logs[s] = x;
          if (at.entries[s].q * at.entries[s].d > 0.0) amax = std::max(amax, x + std::log(at.entries[s].d));
        }
        double denom = 0.0;
        for (std::size_t s = 0; s < at.entries.size(); ++s) {
          logs[s] = std::exp(logs[s] - amax);
          denom += logs[s] * at.entries[s].d;
        }
        gradient->resize(params);
        for (Eigen::Index l = 0; l < params; ++l) {
          Eigen::VectorXd plus = theta;
          Eigen::VectorXd minus = theta;
          plus(l) += kRotationStep;
          minus(l) -= kRotationStep;
          const SubsetWeights up = compute_dI(datum, linalg::RotationParams::unflatten(dims, plus));
          const SubsetWeights down = compute_dI(datum, linalg::RotationParams::unflatten(dims, minus));
          double num = 0.0;
          for (std::size_t s = 0; s < at.entries.size(); ++s) {
            num += logs[s] * (up.entries[s].d - down.entries[s].d) / (2.0 * kRotationStep);
          }
          (*gradient)(l) = -num / denom;
        }
      }
      warm = u;
      return base.log_value;
    };
    AscentOptions options;
    options.max_iter = config.max_iter;
    options.tol = std::max(config.tol, 1e-7);
    options.divergence_threshold = kLogDivergence;
    try {
      out.ascent = maximize_bfgs(objective, theta0, options);
    } catch (const InnerUnbounded& e) {
      out.unbounded = e.result;
    }
    return out;
  };

  std::vector<BartheStart> starts(static_cast<std::size_t>(config.starts));
  if (std::thread::hardware_concurrency() > 1 && config.starts > 1) {
    std::vector<std::future<BartheStart>> futures;
    for (int i = 0; i < config.starts; ++i) futures.push_back(std::async(std::launch::async, run, i));
    for (int i = 0; i < config.starts; ++i) starts[static_cast<std::size_t>(i)] = futures[static_cast<std::size_t>(i)].get();
  } else {
    for (int i = 0; i < config.starts; ++i) starts[static_cast<std::size_t>(i)] = run(i);
  }

  for (const auto& s : starts) {
    if (s.unbounded) {
      OptimizeReport report = infinite_report(*s.unbounded);
      report.starts_used = config.starts;
      report.best_start = s.index;
      return report;
    }
  }
  const BartheStart* best = nullptr;
  for (const auto& s : starts) {
    if (best == nullptr || s.ascent.value > best->ascent.value) best = &s;
  }

  OptimizeReport report;
  report.method = "barthe";
  report.starts_used = config.starts;
  report.best_start = best->index;
  report.iterations = best->ascent.iterations;
  report.gradient_norm = best->ascent.gradient.size() ? best->ascent.gradient.cwiseAbs().maxCoeff() : 0.0;
  report.converged = best->ascent.converged ||
                     (best->ascent.stalled && report.gradient_norm <= kOuterStationarity);
  if (best->ascent.diverged) {
    report.outcome = Outcome::ApparentlyUnbounded;
    report.value = kInf;
    report.note = "squared objective exceeded 1e18";
    return report;
  }
  const auto rotations = linalg::RotationParams::unflatten(dims, best->ascent.x);
  const LambdaResult inner = optimize_lambda(compute_dI(datum, rotations), q, inner_config);
  report.converged = report.converged && inner.status == LambdaStatus::Optimal;
  report.value = std::exp(0.5 * inner.log_value);
  report.argument = gaussian_from(datum, rotations, inner.lambda);
  return report;
}

double rank1_constant(const Eigen::MatrixXd& vectors, const std::vector<double>& p,
                      const LambdaConfig& config) {
  if (static_cast<std::size_t>(vectors.cols()) != p.size()) {
    throw std::invalid_argument("one exponent per vector is required");
  }
  BLDatum datum;
  datum.n = static_cast<int>(vectors.rows());
  for (std::size_t j = 0; j < p.size(); ++j) {
    datum.maps.push_back({p[j], vectors.col(static_cast<Eigen::Index>(j)).transpose()});
  }
  const FlattenedExponents q = flatten_exponents(datum);
  const std::vector<int> dims(p.size(), 1);
  const LambdaResult r = optimize_lambda(compute_dI(datum, linalg::RotationParams::identity(dims)), q, config);
  if (!r.bounded()) return kInf;
  return std::exp(0.5 * r.log_value);
}

std::string weights_csv(const SubsetWeights& weights) {
  std::string out = "subset,d_I,q_I\n";
  char buf[64];
  for (const auto& e : weights.entries) {
    for (std::size_t i = 0; i < e.subset.size(); ++i) {
      if (i > 0) out += "-";
      out += std::to_string(e.subset[i] + 1);
    }
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", e.d, e.q);
    out += buf;
  }
  return out;
}

}  // namespace blc
