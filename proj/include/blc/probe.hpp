#pragma once

#include <optional>
#include <string>
#include <vector>

#include "blc/datum.hpp"
#include "blc/report.hpp"

namespace blc {

/// (2 / (|a| + |a+1| + 1))^{1/2}, cross-checked against
/// min{1, |a|^{-1/2}, |a+1|^{-1/2}}. Throws std::logic_error if the two
/// closed forms disagree by more than 1e-12.
double four_linear_reference(double a);

/// Closed form for four rank-one maps in R^2 with p = (1/2, 1/2, 1/2, 1/2);
/// `vectors` holds v_1..v_4 as columns. nullopt marks an infinite constant.
std::optional<double> general_four_linear_reference(const Eigen::Matrix<double, 2, 4>& vectors);

enum class Method { Lieb, Barthe, Auto };

Method parse_method(const std::string& name);
std::string to_string(Method method);
/// Auto resolves to Barthe when K <= 12, Lieb otherwise.
Method resolve_method(Method method, const BLDatum& datum);

/// Runs the chosen optimizer on a datum.
OptimizeReport compute_constant(const BLDatum& datum, Method method, const SolverConfig& config);

struct PathSample {
  double t = 0.0;
  double value = 0.0;  // meaningful only when !infinite
  bool infinite = false;
  std::string method;
  bool converged = false;
  int iterations = 0;
  double seconds = 0.0;
  std::string certificate;  // why the sample is infinite, or the solver error
};

/// The datum path t -> (1 - t) L_a + t L_b with fixed exponents.
class DatumPath {
 public:
  /// Throws std::invalid_argument when the signatures differ.
  DatumPath(BLDatum a, BLDatum b, Method method, SolverConfig config);

  BLDatum at(double t) const;
  PathSample sample(double t) const;
  /// Samples at t = i / (grid - 1), i = 0..grid-1, in order of t.
  std::vector<PathSample> sample_grid(int grid) const;

 private:
  BLDatum a_;
  BLDatum b_;
  Method method_;
  SolverConfig config_;
};

/// Samples at t = i / (grid - 1). Solver failures are recorded per sample.
std::vector<PathSample> sample_path(const BLDatum& a, const BLDatum& b, int grid, Method method,
                                    const SolverConfig& config);

struct Slopes {
  double left = 0.0;
  double right = 0.0;
};

/// Backward and forward difference quotients at t0 from samples at t0 - h,
/// t0, t0 + h (matched within 1e-12). Throws std::invalid_argument when a
/// stencil point is missing and std::domain_error when one is infinite.
Slopes one_sided_slopes(const std::vector<PathSample>& samples, double t0, double h);

/// Resamples the stencil on the path and returns the slopes.
Slopes one_sided_slopes(const DatumPath& path, double t0, double h);

struct HolderEstimate {
  bool flat = false;  // all differences below 1e-12: exponent >= 1 to tolerance
  double alpha = 0.0;
  double residual = 0.0;  // RMS residual of the log-log fit
  int points = 0;
};

/// Least-squares slope of log|BL(t0 + h_i) - BL(t0)| against log h_i. An
/// exploratory diagnostic. `offsets` are the h_i (at least 6, nonzero) and
/// `values` the constants at t0 + h_i. Throws std::invalid_argument on fewer
/// than 6 points or non-finite values.
HolderEstimate holder_exponent_estimate(double value_at_t0, const std::vector<double>& offsets,
                                        const std::vector<double>& values);

/// Samples t0 + h / 2^i, i = 0..count-1, on the path and estimates the exponent.
HolderEstimate holder_exponent_estimate(const DatumPath& path, double t0, double h, int count = 6);

struct SemicontinuityWitness {
  double value = 0.0;     // constant at t0
  double liminf = 0.0;    // smaller of the two one-sided limit estimates
  bool holds = false;     // liminf >= value - tolerance
};

/// Approaches t0 from both sides at distances h / 2^i, i = 0..depth-1. Each
/// side's limit is the intercept at distance 0 of a least-squares line through
/// its last `tail` samples (their value when tail == 1); an infinite sample
/// makes that side infinite. The smaller limit is compared with the value at t0.
SemicontinuityWitness lower_semicontinuity_witness(const DatumPath& path, double t0, double h,
                                                   int depth, int tail, double tolerance);

/// CSV: t,value,infinite,method,converged,iterations,seconds. The value cell
/// is empty for infinite samples.
std::string path_csv(const std::vector<PathSample>& samples);

}  // namespace blc
