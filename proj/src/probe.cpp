#include "blc/probe.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "blc/barthe.hpp"
#include "blc/finiteness.hpp"
#include "blc/gaussian.hpp"

namespace blc {

double four_linear_reference(double a) {
  const double reciprocal_sum = std::sqrt(2.0 / (std::abs(a) + std::abs(a + 1.0) + 1.0));
  const double min_form =
      std::min({1.0, 1.0 / std::sqrt(std::abs(a)), 1.0 / std::sqrt(std::abs(a + 1.0))});
  if (std::abs(reciprocal_sum - min_form) > 1e-12) {
    throw std::logic_error("four-linear closed forms disagree at a = " + std::to_string(a));
  }
  return reciprocal_sum;
}

std::optional<double> general_four_linear_reference(const Eigen::Matrix<double, 2, 4>& v) {
  auto det = [&](int i, int j) { return v(0, i) * v(1, j) - v(1, i) * v(0, j); };
  const double s = std::abs(det(0, 1) * det(2, 3)) + std::abs(det(0, 2) * det(1, 3)) +
                   std::abs(det(0, 3) * det(1, 2));
  if (!(s > 0.0)) return std::nullopt;
  return std::sqrt(2.0 / s);
}

Method parse_method(const std::string& name) {
  if (name == "lieb") return Method::Lieb;
  if (name == "barthe") return Method::Barthe;
  if (name == "auto") return Method::Auto;
  throw std::invalid_argument("unknown method '" + name + "' (expected lieb, barthe or auto)");
}

std::string to_string(Method method) {
  switch (method) {
    case Method::Lieb:
      return "lieb";
    case Method::Barthe:
      return "barthe";
    case Method::Auto:
      return "auto";
  }
  return "?";
}

Method resolve_method(Method method, const BLDatum& datum) {
  if (method != Method::Auto) return method;
  return datum.total_rank() <= 12 ? Method::Barthe : Method::Lieb;
}

OptimizeReport compute_constant(const BLDatum& datum, Method method, const SolverConfig& config) {
  method = resolve_method(method, datum);
  if (method == Method::Lieb) return optimize_lieb(datum, config);
  FinitenessVerdict verdict = decide_finiteness(datum, config.finiteness_budget, config.seed);
  if (verdict.status == FinitenessStatus::Infinite) {
    OptimizeReport report;
    report.method = "barthe";
    report.outcome = Outcome::Infinite;
    report.value = std::numeric_limits<double>::infinity();
    report.verdict = std::move(verdict);
    report.note = "the finiteness check produced a certificate";
    return report;
  }
  OptimizeReport report = optimize_barthe(datum, config);
  if (!report.verdict) report.verdict = std::move(verdict);
  return report;
}

DatumPath::DatumPath(BLDatum a, BLDatum b, Method method, SolverConfig config)
    : a_(std::move(a)), b_(std::move(b)), method_(method), config_(config) {
  if (!same_signature(a_, b_)) {
    throw std::invalid_argument("path endpoints differ in (n, m, n_j, p_j)");
  }
}

BLDatum DatumPath::at(double t) const { return interpolate(a_, b_, t); }

PathSample DatumPath::sample(double t) const {
  PathSample s;
  s.t = t;
  const BLDatum datum = at(t);
  const Method method = resolve_method(method_, datum);
  s.method = to_string(method);
  const auto start = std::chrono::steady_clock::now();
  try {
    const OptimizeReport report = compute_constant(datum, method, config_);
    s.iterations = report.iterations;
    s.converged = report.converged;
    if (report.finite()) {
      s.value = report.value;
    } else {
      s.infinite = true;
      s.converged = report.outcome == Outcome::Infinite;
      s.certificate = report.verdict && report.verdict->certificate ? describe(*report.verdict)
                                                                     : report.note;
    }
  } catch (const std::exception& e) {
    s.value = std::numeric_limits<double>::quiet_NaN();
    s.certificate = e.what();
  }
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s;
}

std::vector<PathSample> DatumPath::sample_grid(int grid) const {
  if (grid < 2) throw std::invalid_argument("grid must be at least 2");
  std::vector<PathSample> out;
  out.reserve(static_cast<std::size_t>(grid));
  for (int i = 0; i < grid; ++i) out.push_back(sample(static_cast<double>(i) / (grid - 1)));
  return out;
}

std::vector<PathSample> sample_path(const BLDatum& a, const BLDatum& b, int grid, Method method,
                                    const SolverConfig& config) {
  return DatumPath(a, b, method, config).sample_grid(grid);
}

namespace {

const PathSample& find_sample(const std::vector<PathSample>& samples, double t) {
  for (const auto& s : samples) {
    if (std::abs(s.t - t) <= 1e-12 * std::max(1.0, std::abs(t))) return s;
  }
  throw std::invalid_argument("no sample at t = " + std::to_string(t));
}

double finite_value(const PathSample& s) {
  if (s.infinite || !std::isfinite(s.value)) {
    throw std::domain_error("non-finite constant at t = " + std::to_string(s.t));
  }
  return s.value;
}

}  // namespace

Slopes one_sided_slopes(const std::vector<PathSample>& samples, double t0, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("step h must be positive");
  const double left = finite_value(find_sample(samples, t0 - h));
  const double mid = finite_value(find_sample(samples, t0));
  const double right = finite_value(find_sample(samples, t0 + h));
  return {(mid - left) / h, (right - mid) / h};
}

Slopes one_sided_slopes(const DatumPath& path, double t0, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("step h must be positive");
  const std::vector<PathSample> stencil{path.sample(t0 - h), path.sample(t0), path.sample(t0 + h)};
  return one_sided_slopes(stencil, t0, h);
}

HolderEstimate holder_exponent_estimate(double value_at_t0, const std::vector<double>& offsets,
                                        const std::vector<double>& values) {
  if (offsets.size() != values.size()) throw std::invalid_argument("offsets and values differ in length");
  if (offsets.size() < 6) throw std::invalid_argument("at least 6 samples are required");
  if (!std::isfinite(value_at_t0)) throw std::invalid_argument("value at t0 must be finite");
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    if (!std::isfinite(values[i])) throw std::invalid_argument("sample values must be finite");
    if (offsets[i] == 0.0) throw std::invalid_argument("offsets must be nonzero");
    const double diff = std::abs(values[i] - value_at_t0);
    if (diff < 1e-12) continue;
    xs.push_back(std::log(std::abs(offsets[i])));
    ys.push_back(std::log(diff));
  }
  HolderEstimate est;
  est.points = static_cast<int>(xs.size());
  if (xs.size() < 2) {
    est.flat = true;
    est.alpha = 1.0;
    return est;
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  est.alpha = sxy / sxx;
  const double intercept = my - est.alpha * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (est.alpha * xs[i] + intercept);
    ss += e * e;
  }
  est.residual = std::sqrt(ss / n);
  return est;
}

HolderEstimate holder_exponent_estimate(const DatumPath& path, double t0, double h, int count) {
  const double v0 = finite_value(path.sample(t0));
  std::vector<double> offsets;
  std::vector<double> values;
  for (int i = 0; i < count; ++i) {
    const double off = h / std::pow(2.0, i);
    offsets.push_back(off);
    const PathSample s = path.sample(t0 + off);
    values.push_back(s.infinite ? std::numeric_limits<double>::infinity() : s.value);
  }
  return holder_exponent_estimate(v0, offsets, values);
}

SemicontinuityWitness lower_semicontinuity_witness(const DatumPath& path, double t0, double h,
                                                   int depth, int tail, double tolerance) {
  if (depth < 1 || tail < 1 || tail > depth) throw std::invalid_argument("need 1 <= tail <= depth");
  SemicontinuityWitness w;
  const PathSample centre = path.sample(t0);
  w.value = centre.infinite ? std::numeric_limits<double>::infinity() : centre.value;
  w.liminf = std::numeric_limits<double>::infinity();
  for (double side : {-1.0, 1.0}) {
    std::vector<double> x;
    std::vector<double> y;
    bool infinite = false;
    for (int i = depth - tail; i < depth; ++i) {
      const double offset = h / std::pow(2.0, i);
      const PathSample s = path.sample(t0 + side * offset);
      if (s.infinite || !std::isfinite(s.value)) infinite = true;
      x.push_back(offset);
      y.push_back(s.value);
    }
    if (infinite) continue;
    double limit = y.back();
    if (x.size() > 1) {
      const double k = static_cast<double>(x.size());
      const double mx = std::accumulate(x.begin(), x.end(), 0.0) / k;
      const double my = std::accumulate(y.begin(), y.end(), 0.0) / k;
      double sxy = 0.0;
      double sxx = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
      }
      limit = my - (sxy / sxx) * mx;
    }
    w.liminf = std::min(w.liminf, limit);
  }
  if (std::isinf(w.value)) {
    w.holds = std::isinf(w.liminf);
  } else {
    w.holds = w.liminf >= w.value - tolerance;
  }
  return w;
}

std::string path_csv(const std::vector<PathSample>& samples) {
  std::string out = "t,value,infinite,method,converged,iterations,seconds\n";
  char buf[128];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof buf, "%.17g,", s.t);
    out += buf;
    if (!s.infinite) {
      std::snprintf(buf, sizeof buf, "%.17g", s.value);
      out += buf;
    }
    std::snprintf(buf, sizeof buf, ",%d,%s,%d,%d,%.6f\n", s.infinite ? 1 : 0, s.method.c_str(),
                  s.converged ? 1 : 0, s.iterations, s.seconds);
    out += buf;
  }
  return out;
}

}  // namespace blc
