#include "blc/datum.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "blc/linalg.hpp"

namespace blc {

int BLDatum::total_rank() const {
  int k = 0;
  for (const auto& map : maps) k += map.target_dim();
  return k;
}

bool BLDatum::is_rank_one() const {
  for (const auto& map : maps) {
    if (map.target_dim() != 1) return false;
  }
  return !maps.empty();
}

std::vector<double> BLDatum::exponents() const {
  std::vector<double> p;
  p.reserve(maps.size());
  for (const auto& map : maps) p.push_back(map.p);
  return p;
}

Eigen::MatrixXd matrix_from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return Eigen::MatrixXd(0, 0);
  const std::size_t cols = rows.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) {
      throw StructuralError("row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                            " entries, expected " + std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

ValidationReport validate_datum(const BLDatum& datum) {
  if (datum.n <= 0) throw StructuralError("ambient dimension n must be positive");
  ValidationReport report;
  if (datum.maps.empty()) {
    report.violations.push_back({"no-maps", -1, "a datum needs at least one map"});
    return report;
  }
  for (int j = 0; j < datum.m(); ++j) {
    const auto& map = datum.maps[static_cast<std::size_t>(j)];
    if (map.matrix.rows() > 0 && map.matrix.cols() != datum.n) {
      throw StructuralError("map " + std::to_string(j) + " has rows of length " +
                            std::to_string(map.matrix.cols()) + ", expected n = " +
                            std::to_string(datum.n));
    }
    const std::string where = "map " + std::to_string(j);
    if (!(map.p >= 0.0 && map.p <= 1.0)) {
      report.violations.push_back(
          {"exponent-out-of-range", j, where + ": exponent " + std::to_string(map.p) + " not in [0,1]"});
    }
    const int nj = map.target_dim();
    if (nj < 1 || nj > datum.n) {
      report.violations.push_back({"target-dimension", j,
                                   where + ": target dimension " + std::to_string(nj) +
                                       " not in [1, " + std::to_string(datum.n) + "]"});
      continue;
    }
    if (!map.matrix.allFinite()) {
      report.violations.push_back({"non-finite-entry", j, where + ": matrix has non-finite entries"});
      continue;
    }
    const int rank = linalg::numerical_rank(map.matrix);
    if (rank < nj) {
      report.violations.push_back({"not-surjective", j,
                                   where + ": not surjective (rank " + std::to_string(rank) +
                                       " < " + std::to_string(nj) + ")"});
    }
  }
  return report;
}

void require_valid(const BLDatum& datum) {
  const auto report = validate_datum(datum);
  if (report.ok()) return;
  std::string message = "invalid datum:";
  for (const auto& v : report.violations) message += " [" + v.code + "] " + v.message + ";";
  throw InvalidDatum(message);
}

double scaling_defect(const BLDatum& datum) {
  double sum = 0.0;
  for (const auto& map : datum.maps) sum += map.p * map.target_dim();
  return sum - datum.n;
}

namespace {

Eigen::MatrixXd coordinate_projection(int n, int dropped) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n - 1, n);
  int row = 0;
  for (int c = 0; c < n; ++c) {
    if (c == dropped) continue;
    m(row++, c) = 1.0;
  }
  return m;
}

BLDatum with_rows(int n, const std::vector<std::vector<double>>& rows, double p) {
  BLDatum d;
  d.n = n;
  for (const auto& r : rows) d.maps.push_back({p, matrix_from_rows({r})});
  return d;
}

}  // namespace

std::vector<std::string> builtin_family_names() {
  return {"holder", "loomis-whitney", "young", "four-linear", "parallel"};
}

BLDatum builtin_datum(std::string_view name, const FamilyParams& params) {
  BLDatum d;
  if (name == "holder") {
    const int n = params.n > 0 ? params.n : 2;
    const int m = params.m > 0 ? params.m : 2;
    if (n < 1 || m < 1) throw std::invalid_argument("holder: n and m must be positive");
    d.n = n;
    for (int j = 0; j < m; ++j) d.maps.push_back({1.0 / m, Eigen::MatrixXd::Identity(n, n)});
  } else if (name == "loomis-whitney") {
    const int n = params.n > 0 ? params.n : 3;
    if (n < 2) throw std::invalid_argument("loomis-whitney: n must be at least 2");
    d.n = n;
    for (int j = 0; j < n; ++j) d.maps.push_back({1.0 / (n - 1), coordinate_projection(n, j)});
  } else if (name == "young") {
    d = with_rows(2, {{1, 0}, {0, 1}, {1, -1}}, 2.0 / 3.0);
  } else if (name == "four-linear") {
    if (!std::isfinite(params.a)) throw std::invalid_argument("four-linear: a must be finite");
    d = with_rows(2, {{1, 0}, {0, 1}, {1, -1}, {1, params.a}}, 0.5);
  } else if (name == "parallel") {
    const int m = params.m > 0 ? params.m : 2;
    d.n = 2;
    for (int j = 0; j < m; ++j) d.maps.push_back({2.0 / m, matrix_from_rows({{1, 0}})});
  } else {
    throw std::invalid_argument("unknown datum family '" + std::string(name) + "'");
  }
  if (!params.p.empty()) {
    if (params.p.size() != d.maps.size()) {
      throw std::invalid_argument("exponent override has " + std::to_string(params.p.size()) +
                                  " entries, family has " + std::to_string(d.maps.size()) + " maps");
    }
    for (std::size_t j = 0; j < d.maps.size(); ++j) d.maps[j].p = params.p[j];
  }
  return d;
}

bool same_signature(const BLDatum& a, const BLDatum& b) {
  if (a.n != b.n || a.m() != b.m()) return false;
  for (std::size_t j = 0; j < a.maps.size(); ++j) {
    if (a.maps[j].matrix.rows() != b.maps[j].matrix.rows()) return false;
    if (a.maps[j].matrix.cols() != b.maps[j].matrix.cols()) return false;
    if (a.maps[j].p != b.maps[j].p) return false;
  }
  return true;
}

BLDatum interpolate(const BLDatum& a, const BLDatum& b, double t) {
  if (!same_signature(a, b)) throw std::invalid_argument("data have different signatures");
  BLDatum d = a;
  for (std::size_t j = 0; j < d.maps.size(); ++j) {
    d.maps[j].matrix = (1.0 - t) * a.maps[j].matrix + t * b.maps[j].matrix;
  }
  return d;
}

BLDatum parse_datum_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw StructuralError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw StructuralError("datum must be a JSON object");
  if (!doc.contains("n") || !doc["n"].is_number_integer()) {
    throw StructuralError("field 'n' must be an integer");
  }
  if (!doc.contains("maps") || !doc["maps"].is_array()) {
    throw StructuralError("field 'maps' must be an array");
  }
  BLDatum d;
  d.n = doc["n"].get<int>();
  if (d.n <= 0) throw StructuralError("field 'n' must be positive");
  int index = 0;
  for (const auto& entry : doc["maps"]) {
    const std::string where = "maps[" + std::to_string(index++) + "]";
    if (!entry.is_object() || !entry.contains("p") || !entry["p"].is_number()) {
      throw StructuralError(where + ": needs a numeric 'p'");
    }
    if (!entry.contains("matrix") || !entry["matrix"].is_array()) {
      throw StructuralError(where + ": needs a 'matrix' array of rows");
    }
    std::vector<std::vector<double>> rows;
    for (const auto& row : entry["matrix"]) {
      if (!row.is_array()) throw StructuralError(where + ": matrix rows must be arrays");
      std::vector<double> values;
      for (const auto& x : row) {
        if (!x.is_number()) throw StructuralError(where + ": matrix entries must be numbers");
        values.push_back(x.get<double>());
      }
      if (static_cast<int>(values.size()) != d.n) {
        throw StructuralError(where + ": row length " + std::to_string(values.size()) +
                              " differs from n = " + std::to_string(d.n));
      }
      rows.push_back(std::move(values));
    }
    Eigen::MatrixXd matrix = rows.empty() ? Eigen::MatrixXd(0, d.n) : matrix_from_rows(rows);
    d.maps.push_back({entry["p"].get<double>(), std::move(matrix)});
  }
  return d;
}

BLDatum read_datum_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_datum_json(buffer.str());
}

namespace {

std::string exact(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string datum_to_json(const BLDatum& datum) {
  std::string out = "{\n  \"n\": " + std::to_string(datum.n) + ",\n  \"maps\": [";
  for (std::size_t j = 0; j < datum.maps.size(); ++j) {
    const auto& map = datum.maps[j];
    out += j == 0 ? "\n" : ",\n";
    out += "    {\"p\": " + exact(map.p) + ", \"matrix\": [";
    for (Eigen::Index r = 0; r < map.matrix.rows(); ++r) {
      out += r == 0 ? "[" : ", [";
      for (Eigen::Index c = 0; c < map.matrix.cols(); ++c) {
        if (c > 0) out += ", ";
        out += exact(map.matrix(r, c));
      }
      out += "]";
    }
    out += "]}";
  }
  out += "\n  ]\n}\n";
  return out;
}

}  // namespace blc
