#include "blc/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "blc/ascent.hpp"
#include "blc/linalg.hpp"

namespace blc {

namespace {

constexpr double kDegenerateDet = 1e-300;
const double kLogDegenerateDet = std::log(kDegenerateDet);
constexpr double kDivergenceValue = 1e9;

double log_det_pd(const Eigen::MatrixXd& a) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

// M = B^T B held through a QR factorization of B. Forming M directly loses
// the small directions once the A_j spread over many orders of magnitude.
class GramFactor {
 public:
  explicit GramFactor(Eigen::MatrixXd b) {
    // Householder QR is accurate on graded matrices when rows are sorted by
    // decreasing norm.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(b.rows()));
    for (Eigen::Index i = 0; i < b.rows(); ++i) order[static_cast<std::size_t>(i)] = i;
    const Eigen::VectorXd norms = b.rowwise().norm();
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index x, Eigen::Index y) { return norms(x) > norms(y); });
    Eigen::MatrixXd sorted(b.rows(), b.cols());
    for (std::size_t i = 0; i < order.size(); ++i) sorted.row(static_cast<Eigen::Index>(i)) = b.row(order[i]);
    n_ = b.cols();
    if (sorted.rows() < n_) {
      log_det_ = -std::numeric_limits<double>::infinity();
      return;
    }
    qr_.compute(sorted);
    log_det_ = 0.0;
    for (Eigen::Index i = 0; i < n_; ++i) {
      const double d = std::abs(qr_.matrixQR()(i, i));
      if (!(d > 0.0)) {
        log_det_ = -std::numeric_limits<double>::infinity();
        return;
      }
      log_det_ += 2.0 * std::log(d);
    }
  }

  bool degenerate() const { return !(log_det_ > kLogDegenerateDet); }
  double log_det() const { return log_det_; }

  /// L M^{-1} L^T for a matrix L with n columns.
  Eigen::MatrixXd pulled(const Eigen::MatrixXd& l) const {
    // M = P R^T R P^T, so L M^{-1} L^T = Z^T Z with R^T Z = P^T L^T.
    const Eigen::MatrixXd rhs = qr_.colsPermutation().transpose() * l.transpose();
    const Eigen::MatrixXd z = qr_.matrixQR()
                                  .topRows(n_)
                                  .template triangularView<Eigen::Upper>()
                                  .transpose()
                                  .solve(rhs);
    Eigen::MatrixXd out = z.transpose() * z;
    return 0.5 * (out + out.transpose());
  }

 private:
  Eigen::Index n_ = 0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
  double log_det_ = 0.0;
};

// Rows sqrt(p_j) U_j L_j with A_j = U_j^T U_j.
Eigen::MatrixXd gram_root(const BLDatum& datum, const GaussianInput& input) {
  Eigen::MatrixXd b(datum.total_rank(), datum.n);
  Eigen::Index row = 0;
  for (std::size_t j = 0; j < datum.maps.size(); ++j) {
    const auto& map = datum.maps[j];
    Eigen::LLT<Eigen::MatrixXd> llt(input.matrices[j]);
    const Eigen::MatrixXd upper = llt.matrixU();
    b.middleRows(row, map.target_dim()) = std::sqrt(map.p) * upper * map.matrix;
    row += map.target_dim();
  }
  return b;
}

Eigen::MatrixXd gram(const BLDatum& datum, const GaussianInput& input) {
  const Eigen::MatrixXd b = gram_root(datum, input);
  return b.transpose() * b;
}

std::string spectrum_of(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  std::ostringstream os;
  os.precision(6);
  os << "[";
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    os << (i ? ", " : "") << eig.eigenvalues()(i);
  }
  os << "]";
  return os.str();
}

}  // namespace

std::string to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Finite:
      return "finite";
    case Outcome::Infinite:
      return "infinite";
    case Outcome::ApparentlyUnbounded:
      return "apparently unbounded";
  }
  return "?";
}

void check_gaussian_input(const BLDatum& datum, const GaussianInput& input) {
  if (input.matrices.size() != datum.maps.size()) {
    throw std::invalid_argument("expected one matrix per map");
  }
  for (std::size_t j = 0; j < datum.maps.size(); ++j) {
    const auto& a = input.matrices[j];
    const int nj = datum.maps[j].target_dim();
    if (a.rows() != nj || a.cols() != nj) {
      throw std::invalid_argument("A_" + std::to_string(j) + " must be " + std::to_string(nj) + "x" +
                                  std::to_string(nj));
    }
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, a.cwiseAbs().maxCoeff())) {
      throw std::invalid_argument("A_" + std::to_string(j) + " is not symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) {
      throw std::invalid_argument("A_" + std::to_string(j) + " is not positive definite");
    }
  }
}

double gaussian_ratio(const BLDatum& datum, const GaussianInput& input) {
  check_gaussian_input(datum, input);
  double log_num = 0.0;
  for (std::size_t j = 0; j < datum.maps.size(); ++j) {
    log_num += 0.5 * datum.maps[j].p * log_det_pd(input.matrices[j]);
  }
  const GramFactor factor(gram_root(datum, input));
  if (factor.degenerate()) {
    throw NumericalError("degenerate M: det(sum p_j L_j^T A_j L_j) <= 1e-300, spectrum " +
                         spectrum_of(gram(datum, input)));
  }
  return std::exp(log_num - 0.5 * factor.log_det());
}

LiebChart::LiebChart(const BLDatum& datum) : datum_(&datum) {
  for (const auto& map : datum.maps) {
    offsets_.push_back(dimension_);
    const int nj = map.target_dim();
    dimension_ += nj + linalg::rotation_parameter_count(nj);
    exponent_mass_ += map.p * nj;
  }
}

GaussianInput LiebChart::input(const Eigen::VectorXd& x) const {
  GaussianInput in;
  for (std::size_t j = 0; j < datum_->maps.size(); ++j) {
    const int nj = datum_->maps[j].target_dim();
    const int off = offsets_[j];
    const Eigen::VectorXd eig = x.segment(off, nj).array().exp();
    std::span<const double> angles(x.data() + off + nj,
                                   static_cast<std::size_t>(linalg::rotation_parameter_count(nj)));
    in.matrices.push_back(linalg::assemble_pd(eig, linalg::rotation_from_parameters(angles, nj)));
  }
  return in;
}

Eigen::VectorXd LiebChart::coordinates(const std::vector<linalg::SpectralPD>& spectra) const {
  if (spectra.size() != datum_->maps.size()) throw std::invalid_argument("one spectrum per map");
  Eigen::VectorXd x(dimension_);
  for (std::size_t j = 0; j < spectra.size(); ++j) {
    const int nj = datum_->maps[j].target_dim();
    const int off = offsets_[j];
    if (spectra[j].eigenvalues.size() != nj ||
        static_cast<int>(spectra[j].angles.size()) != linalg::rotation_parameter_count(nj)) {
      throw std::invalid_argument("spectrum size mismatch for map " + std::to_string(j));
    }
    x.segment(off, nj) = spectra[j].eigenvalues.array().log();
    for (std::size_t l = 0; l < spectra[j].angles.size(); ++l) {
      x(off + nj + static_cast<Eigen::Index>(l)) = spectra[j].angles[l];
    }
  }
  return x;
}

double LiebChart::log_ratio(const Eigen::VectorXd& x, Eigen::VectorXd* gradient) const {
  const BLDatum& datum = *datum_;
  const std::size_t m = datum.maps.size();
  std::vector<Eigen::MatrixXd> rotations(m);
  std::vector<Eigen::VectorXd> eigenvalues(m);
  Eigen::MatrixXd root(datum.total_rank(), datum.n);
  Eigen::Index row = 0;
  double value = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const auto& map = datum.maps[j];
    const int nj = map.target_dim();
    const int off = offsets_[j];
    std::span<const double> angles(x.data() + off + nj,
                                   static_cast<std::size_t>(linalg::rotation_parameter_count(nj)));
    rotations[j] = linalg::rotation_from_parameters(angles, nj);
    eigenvalues[j] = x.segment(off, nj).array().exp();
    root.middleRows(row, nj) =
        std::sqrt(map.p) * eigenvalues[j].cwiseSqrt().asDiagonal() * rotations[j] * map.matrix;
    row += nj;
    value += 0.5 * map.p * x.segment(off, nj).sum();
  }
  if (!root.allFinite()) return -std::numeric_limits<double>::infinity();
  const GramFactor factor(std::move(root));
  if (factor.degenerate()) return -std::numeric_limits<double>::infinity();
  value -= 0.5 * factor.log_det();
  if (gradient == nullptr) return value;

  gradient->setZero(dimension_);
  for (std::size_t j = 0; j < m; ++j) {
    const auto& map = datum.maps[j];
    const int nj = map.target_dim();
    const int off = offsets_[j];
    const Eigen::MatrixXd pulled = factor.pulled(map.matrix);
    const Eigen::MatrixXd rotated = rotations[j] * pulled * rotations[j].transpose();
    for (int k = 0; k < nj; ++k) {
      (*gradient)(off + k) = 0.5 * map.p * (1.0 - eigenvalues[j](k) * rotated(k, k));
    }
    if (nj < 2) continue;
    std::span<const double> angles(x.data() + off + nj,
                                   static_cast<std::size_t>(linalg::rotation_parameter_count(nj)));
    const auto derivs = linalg::rotation_derivatives(angles, nj);
    const Eigen::MatrixXd left = pulled * rotations[j].transpose() * eigenvalues[j].asDiagonal();
    for (std::size_t l = 0; l < derivs.size(); ++l) {
      (*gradient)(off + nj + static_cast<Eigen::Index>(l)) = -map.p * (left * derivs[l]).trace();
    }
  }
  return value;
}

void LiebChart::normalize(Eigen::VectorXd& x) const {
  if (!(exponent_mass_ > 0.0)) return;
  double weighted = 0.0;
  for (std::size_t j = 0; j < datum_->maps.size(); ++j) {
    weighted += datum_->maps[j].p * x.segment(offsets_[j], datum_->maps[j].target_dim()).sum();
  }
  const double shift = weighted / exponent_mass_;
  for (std::size_t j = 0; j < datum_->maps.size(); ++j) {
    x.segment(offsets_[j], datum_->maps[j].target_dim()).array() -= shift;
  }
}

namespace {

struct StartOutcome {
  AscentResult ascent;
  int index = 0;
};

template <typename Fn>
std::vector<StartOutcome> run_starts(int starts, Fn&& fn) {
  std::vector<StartOutcome> out(static_cast<std::size_t>(starts));
  if (std::thread::hardware_concurrency() > 1 && starts > 1) {
    std::vector<std::future<AscentResult>> futures;
    for (int i = 0; i < starts; ++i) futures.push_back(std::async(std::launch::async, fn, i));
    for (int i = 0; i < starts; ++i) out[static_cast<std::size_t>(i)] = {futures[static_cast<std::size_t>(i)].get(), i};
  } else {
    for (int i = 0; i < starts; ++i) out[static_cast<std::size_t>(i)] = {fn(i), i};
  }
  return out;
}

}  // namespace

OptimizeReport optimize_lieb(const BLDatum& datum, const SolverConfig& config) {
  if (config.starts < 1) throw std::invalid_argument("starts must be >= 1");
  if (!(config.tol > 0.0)) throw std::invalid_argument("tol must be positive");
  OptimizeReport report;
  report.method = "lieb";
  FinitenessVerdict verdict = decide_finiteness(datum, config.finiteness_budget, config.seed);
  if (verdict.status == FinitenessStatus::Infinite) {
    report.outcome = Outcome::Infinite;
    report.value = std::numeric_limits<double>::infinity();
    report.note = "refused: the finiteness check produced a certificate";
    report.verdict = std::move(verdict);
    return report;
  }
  report.verdict = std::move(verdict);

  const LiebChart chart(datum);
  AscentOptions options;
  options.max_iter = config.max_iter;
  options.tol = config.tol;
  options.divergence_threshold = std::log(kDivergenceValue);
  options.normalize = [&chart](Eigen::VectorXd& x) { chart.normalize(x); };
  const Objective objective = [&chart](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    return chart.log_ratio(x, g);
  };

  auto run = [&](int start) {
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(chart.dimension());
    if (start > 0) {
      std::mt19937_64 rng(config.seed ^ static_cast<std::uint64_t>(start));
      std::uniform_real_distribution<double> log_eig(-2.0, 2.0);
      std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
      Eigen::Index k = 0;
      for (const auto& map : datum.maps) {
        const int nj = map.target_dim();
        for (int i = 0; i < nj; ++i) x0(k++) = log_eig(rng);
        for (int i = 0; i < linalg::rotation_parameter_count(nj); ++i) x0(k++) = angle(rng);
      }
    }
    return maximize_bfgs(objective, x0, options);
  };
  const auto outcomes = run_starts(config.starts, run);

  const StartOutcome* best = nullptr;
  for (const auto& o : outcomes) {
    if (best == nullptr || o.ascent.value > best->ascent.value) best = &o;
  }
  report.starts_used = config.starts;
  report.best_start = best->index;
  report.iterations = best->ascent.iterations;
  report.converged = best->ascent.converged;
  report.gradient_norm =
      best->ascent.gradient.size() ? best->ascent.gradient.cwiseAbs().maxCoeff() : 0.0;
  if (!std::isfinite(best->ascent.value)) {
    throw NumericalError("lieb: every start began at a degenerate point");
  }
  if (best->ascent.diverged) {
    report.outcome = Outcome::ApparentlyUnbounded;
    report.value = std::numeric_limits<double>::infinity();
    report.note = "gaussian ratio exceeded 1e9; see finiteness diagnostics";
    return report;
  }
  report.argument = chart.input(best->ascent.x);
  report.value = gaussian_ratio(datum, report.argument);
  return report;
}

GaussianInput fixed_point_step(const BLDatum& datum, const GaussianInput& input) {
  check_gaussian_input(datum, input);
  const GramFactor factor(gram_root(datum, input));
  if (factor.degenerate()) {
    throw NumericalError("fixed point step: M is singular, spectrum " +
                         spectrum_of(gram(datum, input)));
  }
  GaussianInput next;
  for (std::size_t j = 0; j < datum.maps.size(); ++j) {
    const auto& l = datum.maps[j].matrix;
    const Eigen::MatrixXd c = factor.pulled(l);
    Eigen::LLT<Eigen::MatrixXd> cl(c);
    if (cl.info() != Eigen::Success) {
      throw NumericalError("fixed point step: L_" + std::to_string(j) + " M^-1 L_" +
                           std::to_string(j) + "^T is singular");
    }
    Eigen::MatrixXd a = cl.solve(Eigen::MatrixXd::Identity(c.rows(), c.cols()));
    next.matrices.push_back(0.5 * (a + a.transpose()));
  }
  return next;
}

FixedPointResult iterate_fixed_point(const BLDatum& datum, GaussianInput start, int max_iter,
                                     double tol) {
  FixedPointResult r;
  r.input = std::move(start);
  r.value = gaussian_ratio(datum, r.input);
  for (r.iterations = 0; r.iterations < max_iter;) {
    GaussianInput next = fixed_point_step(datum, r.input);
    const double value = gaussian_ratio(datum, next);
    ++r.iterations;
    const bool settled = std::abs(value - r.value) <= tol * std::abs(r.value);
    r.input = std::move(next);
    r.value = value;
    if (settled) {
      r.converged = true;
      break;
    }
  }
  return r;
}

}  // namespace blc
