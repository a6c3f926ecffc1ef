#include "blc/ascent.hpp"

#include <cmath>

namespace blc {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;
// Stop when this many iterations together gain less than kStallGain (relative).
constexpr int kStallWindow = 100;
constexpr double kStallGain = 1e-13;

double sanitize(double v) { return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v; }

}  // namespace

AscentResult maximize_bfgs(const Objective& f, Eigen::VectorXd x0, const AscentOptions& options) {
  const Eigen::Index dim = x0.size();
  AscentResult r;
  if (options.normalize) options.normalize(x0);
  r.x = std::move(x0);
  r.gradient = Eigen::VectorXd::Zero(dim);
  r.value = sanitize(f(r.x, &r.gradient));
  if (!std::isfinite(r.value)) {
    r.stalled = true;
    return r;
  }
  if (dim == 0) {
    r.converged = true;
    return r;
  }

  // Inverse Hessian approximation of -f.
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(dim, dim);
  bool fresh = true;
  Eigen::VectorXd g_next(dim);
  double window_start = r.value;
  while (true) {
    if (r.gradient.cwiseAbs().maxCoeff() <= options.tol) {
      r.converged = true;
      break;
    }
    if (r.value > options.divergence_threshold) {
      r.diverged = true;
      break;
    }
    if (r.iterations >= options.max_iter) break;

    Eigen::VectorXd d = h * r.gradient;
    double slope = r.gradient.dot(d);
    if (!(slope > 0.0)) {
      h.setIdentity();
      fresh = true;
      d = r.gradient;
      slope = r.gradient.squaredNorm();
    }
    double step = fresh ? std::min(1.0, 1.0 / r.gradient.cwiseAbs().maxCoeff()) : 1.0;
    bool accepted = false;
    Eigen::VectorXd x_next;
    double f_next = 0.0;
    for (int ls = 0; ls < kMaxBacktracks; ++ls) {
      x_next = r.x + step * d;
      f_next = sanitize(f(x_next, &g_next));
      if (f_next >= r.value + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!fresh) {
        h.setIdentity();
        fresh = true;
        continue;
      }
      r.stalled = true;
      break;
    }

    const Eigen::VectorXd s = x_next - r.x;
    const Eigen::VectorXd y = r.gradient - g_next;
    if (options.normalize) options.normalize(x_next);
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd left = Eigen::MatrixXd::Identity(dim, dim) - rho * s * y.transpose();
      h = left * h * left.transpose() + rho * s * s.transpose();
      fresh = false;
    }
    r.x = std::move(x_next);
    r.value = f_next;
    r.gradient = g_next;
    ++r.iterations;
    if (r.iterations % kStallWindow == 0) {
      if (r.value - window_start <= kStallGain * (1.0 + std::abs(r.value))) {
        r.stalled = true;
        break;
      }
      window_start = r.value;
    }
  }
  return r;
}

}  // namespace blc
