#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "blc/errors.hpp"

namespace blc {

/// One linear surjection L_j : R^n -> R^{n_j} together with its exponent p_j.
struct LinearMap {
  double p = 0.0;
  Eigen::MatrixXd matrix;  // n_j x n

  int target_dim() const { return static_cast<int>(matrix.rows()); }
};

/// A Brascamp–Lieb datum (L, p) on R^n.
struct BLDatum {
  int n = 0;
  std::vector<LinearMap> maps;

  int m() const { return static_cast<int>(maps.size()); }
  /// Sum of target dimensions.
  int total_rank() const;
  bool is_rank_one() const;
  std::vector<double> exponents() const;
};

struct Violation {
  std::string code;
  int map_index = -1;  // -1 when the violation concerns the datum as a whole
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

/// Builds a matrix from a list of rows. Throws StructuralError on ragged rows.
Eigen::MatrixXd matrix_from_rows(const std::vector<std::vector<double>>& rows);

/// Checks every BLDatum invariant. Shape errors (matrix column count != n,
/// non-positive n) throw StructuralError rather than being reported.
ValidationReport validate_datum(const BLDatum& datum);

/// Throws InvalidDatum listing every violation when the datum is not valid.
void require_valid(const BLDatum& datum);

/// Sum_j p_j n_j - n. Zero iff the scaling condition holds.
double scaling_defect(const BLDatum& datum);

/// Tolerance used when deciding whether the scaling condition holds.
inline constexpr double kScalingTolerance = 1e-9;

inline bool satisfies_scaling(const BLDatum& datum) {
  double d = scaling_defect(datum);
  return d <= kScalingTolerance && d >= -kScalingTolerance;
}

struct FamilyParams {
  int n = 0;  // 0 selects the family default
  int m = 0;
  double a = 1.0;
  std::vector<double> p;  // optional override of the family's exponents
};

/// Built-in families: holder, loomis-whitney, young, four-linear, parallel.
/// Throws std::invalid_argument on an unknown name or invalid parameters.
BLDatum builtin_datum(std::string_view name, const FamilyParams& params = {});

std::vector<std::string> builtin_family_names();

/// Entry-wise (1 - t) a + t b with the exponents of `a`. The two data must
/// share n, m, every n_j and every p_j.
BLDatum interpolate(const BLDatum& a, const BLDatum& b, double t);

bool same_signature(const BLDatum& a, const BLDatum& b);

/// JSON datum format: {"n": int, "maps": [{"p": number, "matrix": [[...], ...]}, ...]}.
BLDatum parse_datum_json(std::string_view text);
BLDatum read_datum_file(const std::string& path);
/// Serializes with 17 significant digits, so parse(to_json(d)) == d bit for bit.
std::string datum_to_json(const BLDatum& datum);

}  // namespace blc
