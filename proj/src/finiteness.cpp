#include "blc/finiteness.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "blc/linalg.hpp"
#include "blc/simplex.hpp"

namespace blc {

namespace {

// Upper bound on the rank-one flat enumeration.
constexpr int kMaxFlats = 20000;

double largest_singular_value(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues()(0);
}

double defect_of_orthonormal(const BLDatum& datum, const Eigen::MatrixXd& q,
                             const std::vector<double>& map_scales) {
  double sum = 0.0;
  for (std::size_t j = 0; j < datum.maps.size(); ++j) {
    const auto& map = datum.maps[j];
    const int image_dim = linalg::numerical_rank(map.matrix * q, map_scales[j]);
    sum += map.p * image_dim;
  }
  return static_cast<double>(q.cols()) - sum;
}

std::vector<double> map_scales(const BLDatum& datum) {
  std::vector<double> scales;
  for (const auto& map : datum.maps) scales.push_back(largest_singular_value(map.matrix));
  return scales;
}

// Subspaces compared through their orthogonal projectors.
class SubspaceSet {
 public:
  explicit SubspaceSet(int ambient) : ambient_(ambient) {}

  bool insert(const Eigen::MatrixXd& orthonormal) {
    if (orthonormal.cols() == 0) return false;
    Eigen::MatrixXd projector = orthonormal * orthonormal.transpose();
    for (std::size_t i = 0; i < bases_.size(); ++i) {
      if (bases_[i].cols() != orthonormal.cols()) continue;
      if ((projectors_[i] - projector).cwiseAbs().maxCoeff() < 1e-8) return false;
    }
    bases_.push_back(orthonormal);
    projectors_.push_back(std::move(projector));
    return true;
  }

  const std::vector<Eigen::MatrixXd>& bases() const { return bases_; }
  std::size_t size() const { return bases_.size(); }
  int ambient() const { return ambient_; }

 private:
  int ambient_;
  std::vector<Eigen::MatrixXd> bases_;
  std::vector<Eigen::MatrixXd> projectors_;
};

Eigen::MatrixXd sum_of(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd joined(a.rows(), a.cols() + b.cols());
  joined << a, b;
  return linalg::orthonormal_basis(joined);
}

Eigen::MatrixXd intersection_of(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int n) {
  const Eigen::MatrixXd ac = linalg::orthogonal_complement(a, n);
  const Eigen::MatrixXd bc = linalg::orthogonal_complement(b, n);
  Eigen::MatrixXd joined(n, ac.cols() + bc.cols());
  joined << ac, bc;
  return linalg::orthogonal_complement(joined, n);
}

void rank_one_candidates(const BLDatum& datum, CandidateSet& out) {
  const int n = datum.n;
  // Flats of the vector configuration, by breadth-first extension.
  SubspaceSet flats(n);
  std::vector<Eigen::MatrixXd> frontier;
  for (const auto& map : datum.maps) {
    Eigen::MatrixXd v = linalg::orthonormal_basis(map.matrix.transpose());
    if (flats.insert(v)) frontier.push_back(v);
  }
  while (!frontier.empty() && !out.truncated) {
    std::vector<Eigen::MatrixXd> next;
    for (const auto& flat : frontier) {
      if (flat.cols() == n) continue;
      for (const auto& map : datum.maps) {
        Eigen::MatrixXd grown = sum_of(flat, map.matrix.transpose());
        if (grown.cols() == flat.cols()) continue;
        if (flats.insert(grown)) next.push_back(std::move(grown));
        if (static_cast<int>(flats.size()) >= kMaxFlats) {
          out.truncated = true;
          break;
        }
      }
      if (out.truncated) break;
    }
    frontier = std::move(next);
  }

  SubspaceSet candidates(n);
  candidates.insert(Eigen::MatrixXd::Identity(n, n));
  for (const auto& flat : flats.bases()) {
    candidates.insert(flat);
    candidates.insert(linalg::orthogonal_complement(flat, n));
  }
  out.bases = candidates.bases();
  out.structured = static_cast<int>(out.bases.size());
}

void lattice_candidates(const BLDatum& datum, int budget, CandidateSet& out) {
  const int n = datum.n;
  SubspaceSet lattice(n);
  lattice.insert(Eigen::MatrixXd::Identity(n, n));
  for (const auto& map : datum.maps) {
    lattice.insert(linalg::orthogonal_complement(map.matrix.transpose(), n));
    lattice.insert(linalg::orthonormal_basis(map.matrix.transpose()));
  }
  bool grew = true;
  while (grew) {
    grew = false;
    const std::size_t current = lattice.size();
    for (std::size_t a = 0; a < current && !out.truncated; ++a) {
      for (std::size_t b = a + 1; b < current; ++b) {
        if (static_cast<int>(lattice.size()) >= budget) {
          out.truncated = true;
          break;
        }
        const Eigen::MatrixXd& x = lattice.bases()[a];
        const Eigen::MatrixXd& y = lattice.bases()[b];
        Eigen::MatrixXd s = sum_of(x, y);
        Eigen::MatrixXd i = intersection_of(x, y, n);
        grew = lattice.insert(s) || grew;
        if (static_cast<int>(lattice.size()) < budget) grew = lattice.insert(i) || grew;
      }
    }
    if (out.truncated) break;
  }
  out.bases = lattice.bases();
  out.structured = static_cast<int>(out.bases.size());
}

}  // namespace

double subspace_defect(const BLDatum& datum, const Eigen::MatrixXd& basis) {
  if (basis.rows() != datum.n) {
    throw std::invalid_argument("subspace basis vectors must have dimension n = " +
                                std::to_string(datum.n));
  }
  const Eigen::MatrixXd q = linalg::orthonormal_basis(basis);
  if (q.cols() == 0) throw std::invalid_argument("the zero subspace is excluded");
  return defect_of_orthonormal(datum, q, map_scales(datum));
}

CandidateSet candidate_subspaces(const BLDatum& datum, int budget, std::uint64_t seed) {
  CandidateSet out;
  if (datum.is_rank_one()) {
    rank_one_candidates(datum, out);
    return out;
  }
  lattice_candidates(datum, std::max(budget, 1), out);
  if (datum.n >= 2) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::uniform_int_distribution<int> dim(1, datum.n - 1);
    for (int r = 0; r < budget; ++r) {
      Eigen::MatrixXd g(datum.n, dim(rng));
      for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = gauss(rng);
      out.bases.push_back(linalg::orthonormal_basis(g));
      ++out.random;
    }
  }
  return out;
}

FinitenessVerdict decide_finiteness(const BLDatum& datum, int budget, std::uint64_t seed) {
  require_valid(datum);
  FinitenessVerdict verdict;
  const double scaling = scaling_defect(datum);
  if (std::abs(scaling) > kScalingTolerance) {
    FinitenessCertificate cert;
    cert.scaling = true;
    cert.scaling_defect = scaling;
    if (scaling < 0.0) {
      cert.basis = Eigen::MatrixXd::Identity(datum.n, datum.n);
      cert.defect = -scaling;
    }
    verdict.status = FinitenessStatus::Infinite;
    verdict.certificate = cert;
    return verdict;
  }

  const CandidateSet candidates = candidate_subspaces(datum, budget, seed);
  const auto scales = map_scales(datum);
  verdict.diagnostics.structured = candidates.structured;
  verdict.diagnostics.random = candidates.random;
  verdict.diagnostics.truncated = candidates.truncated;
  verdict.diagnostics.exhaustive = datum.is_rank_one() && !candidates.truncated;

  double worst = kDefectTolerance;
  const Eigen::MatrixXd* witness = nullptr;
  for (const auto& basis : candidates.bases) {
    ++verdict.diagnostics.tested;
    const double defect = defect_of_orthonormal(datum, basis, scales);
    if (defect > worst) {
      worst = defect;
      witness = &basis;
    }
  }
  if (witness != nullptr) {
    FinitenessCertificate cert;
    cert.basis = *witness;
    cert.defect = worst;
    verdict.status = FinitenessStatus::Infinite;
    verdict.certificate = cert;
  } else {
    verdict.status = verdict.diagnostics.exhaustive ? FinitenessStatus::Finite : FinitenessStatus::Unknown;
  }
  return verdict;
}

std::string to_string(FinitenessStatus status) {
  switch (status) {
    case FinitenessStatus::Finite:
      return "Finite";
    case FinitenessStatus::Infinite:
      return "Infinite";
    case FinitenessStatus::Unknown:
      return "Unknown";
  }
  return "?";
}

std::string describe(const FinitenessVerdict& verdict) {
  std::ostringstream os;
  os.precision(12);
  os << to_string(verdict.status);
  if (verdict.certificate) {
    const auto& c = *verdict.certificate;
    if (c.scaling) {
      os << " (scaling: sum p_j n_j - n = " << c.scaling_defect << ")";
    }
    if (c.basis.cols() > 0) {
      os << (c.scaling ? "\n" : " ") << "certificate subspace V of dimension " << c.basis.cols()
         << ", dim V - sum p_j dim(L_j V) = " << c.defect << "\nbasis:";
      for (Eigen::Index col = 0; col < c.basis.cols(); ++col) {
        os << "\n  (";
        for (Eigen::Index r = 0; r < c.basis.rows(); ++r) {
          if (r > 0) os << ", ";
          const double x = c.basis(r, col);
          os << (std::abs(x) < 1e-15 ? 0.0 : x);
        }
        os << ")";
      }
    }
  }
  const auto& d = verdict.diagnostics;
  if (d.tested > 0) {
    os << "\ncandidates tested: " << d.tested << " (structured " << d.structured << ", random "
       << d.random << (d.truncated ? ", truncated at budget" : "")
       << (d.exhaustive ? ", exhaustive" : "") << ")";
  }
  return os.str();
}

DivergenceCheck divergence_certificate(const SubsetWeights& weights, const FlattenedExponents& q) {
  if (q.K != weights.K) throw std::invalid_argument("weights and exponents disagree on K");
  const int K = q.K;
  std::vector<const SubsetWeight*> supported;
  for (const auto& e : weights.entries) {
    if (e.q * e.d > kSupportThreshold) supported.push_back(&e);
  }
  DivergenceCheck check;
  if (supported.empty()) {
    check.kind = DivergenceCheck::Kind::IdenticallyInfinite;
    check.lp_optimum = std::numeric_limits<double>::infinity();
    return check;
  }

  // Shift u = w - 1 so that w in [0, 2]; t = t_plus - t_minus.
  const Eigen::Index vars = K + 2;
  const Eigen::Index rows = static_cast<Eigen::Index>(supported.size()) + K;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, vars);
  Eigen::VectorXd b(rows);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(vars);
  for (std::size_t r = 0; r < supported.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    for (int k : supported[r]->subset) A(row, k) = 1.0;
    A(row, K) = -1.0;
    A(row, K + 1) = 1.0;
    b(row) = static_cast<double>(supported[r]->subset.size());
  }
  for (int k = 0; k < K; ++k) {
    const Eigen::Index row = static_cast<Eigen::Index>(supported.size()) + k;
    A(row, k) = 1.0;
    b(row) = 2.0;
  }
  c.head(K) = q.q;
  c(K) = -1.0;
  c(K + 1) = 1.0;

  const LpResult lp = solve_lp_slack_feasible(A, b, c);
  if (lp.status == LpStatus::Unbounded) {
    throw std::logic_error("divergence LP unbounded despite box constraints");
  }
  check.lp_optimum = lp.objective - q.q.sum();
  if (check.lp_optimum <= kDefectTolerance) return check;

  Eigen::VectorXd u = lp.x.head(K).array() - 1.0;
  const double scale = u.cwiseAbs().maxCoeff();
  if (scale > 0.0) u /= scale;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto* e : supported) {
    double s = 0.0;
    for (int k : e->subset) s += u(k);
    best = std::max(best, s);
  }
  DivergenceDirection dir;
  dir.gap = q.q.dot(u) - best;
  dir.u = std::move(u);
  if (dir.gap <= kDefectTolerance) return check;
  check.kind = DivergenceCheck::Kind::Divergent;
  check.direction = std::move(dir);
  return check;
}

}  // namespace blc
