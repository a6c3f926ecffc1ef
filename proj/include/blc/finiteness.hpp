#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "blc/datum.hpp"
#include "blc/weights.hpp"

namespace blc {

/// Positive defects below this are treated as zero.
inline constexpr double kDefectTolerance = 1e-9;

/// dim V - sum_j p_j dim(L_j V). `basis` holds spanning vectors of V as
/// columns; throws std::invalid_argument if V = {0} or the row count != n.
double subspace_defect(const BLDatum& datum, const Eigen::MatrixXd& basis);

struct CandidateSet {
  std::vector<Eigen::MatrixXd> bases;  // orthonormal columns, deduplicated
  int structured = 0;  // subset spans / kernel lattice members
  int random = 0;
  bool truncated = false;
};

/// Subspaces to test against the dimension condition. Rank-one data get the
/// spans of all subsets of the v_j and their orthogonal complements, which is
/// exhaustive. Other data get the lattice generated by the kernels and row
/// spaces of the L_j under pairwise sums and intersections (up to `budget`
/// members) plus `budget` seeded random subspaces.
CandidateSet candidate_subspaces(const BLDatum& datum, int budget, std::uint64_t seed = 0);

enum class FinitenessStatus { Finite, Infinite, Unknown };

struct FinitenessCertificate {
  bool scaling = false;
  double scaling_defect = 0.0;  // sum p_j n_j - n when scaling fails
  Eigen::MatrixXd basis;        // violating subspace; empty for scaling failures with excess
  double defect = 0.0;          // subspace defect of `basis` when present
};

struct FinitenessDiagnostics {
  int tested = 0;
  int structured = 0;
  int random = 0;
  bool truncated = false;
  bool exhaustive = false;
};

struct FinitenessVerdict {
  FinitenessStatus status = FinitenessStatus::Unknown;
  std::optional<FinitenessCertificate> certificate;
  FinitenessDiagnostics diagnostics;
};

/// Scaling test first, then the subspace search. Finite is only returned for
/// rank-one data, where the candidate family is exhaustive. Throws
/// InvalidDatum on an invalid datum.
FinitenessVerdict decide_finiteness(const BLDatum& datum, int budget = 64, std::uint64_t seed = 0);

std::string to_string(FinitenessStatus status);
std::string describe(const FinitenessVerdict& verdict);

/// Ray u (||u||_inf = 1) with <q,u> > max over supported subsets of sum_{k in I} u_k.
struct DivergenceDirection {
  Eigen::VectorXd u;
  double gap = 0.0;
};

struct DivergenceCheck {
  enum class Kind { Bounded, Divergent, IdenticallyInfinite } kind = Kind::Bounded;
  std::optional<DivergenceDirection> direction;
  double lp_optimum = 0.0;
};

/// Subsets with q_I d_I above this take part in the objective.
inline constexpr double kSupportThreshold = 1e-14;

/// Decides whether the generalized Barthe objective is bounded over lambda
/// for fixed weights by solving
///   maximize <q,u> - t  s.t.  sum_{k in I} u_k <= t  (supported I),  |u_k| <= 1.
DivergenceCheck divergence_certificate(const SubsetWeights& weights, const FlattenedExponents& q);

}  // namespace blc
