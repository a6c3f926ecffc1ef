// blc: Brascamp–Lieb constants from the command line.
//
// Exit codes: 0 success / finite, 1 invalid datum, 2 I/O, parse or usage
// error, 3 infinite constant, 4 finiteness unknown.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "blc/barthe.hpp"
#include "blc/datum.hpp"
#include "blc/finiteness.hpp"
#include "blc/gaussian.hpp"
#include "blc/probe.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitIo = 2;
constexpr int kExitInfinite = 3;
constexpr int kExitUnknown = 4;

struct Options {
  std::string file;
  std::string file_b;
  std::string method = "auto";
  int starts = 8;
  int max_iter = 5000;
  double tol = 1e-8;
  std::uint64_t seed = 0;
  int budget = 64;
  int grid = 11;
  std::string out;
  bool both = false;
  std::optional<double> slopes;
  double h = 1e-3;
  bool emit = false;
  std::string family;
  int family_n = 0;
  int family_m = 0;
  double family_a = 1.0;
  std::vector<double> family_p;
  std::vector<double> angles;
};

std::string fmt(double x, int digits = 17) {
  if (std::isinf(x)) return x > 0 ? "+inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

blc::SolverConfig solver_config(const Options& o) {
  blc::SolverConfig c;
  c.starts = o.starts;
  c.max_iter = o.max_iter;
  c.tol = o.tol;
  c.seed = o.seed;
  c.finiteness_budget = o.budget;
  return c;
}

// Loads and validates; prints the problem and returns an exit code on failure.
std::optional<blc::BLDatum> load(const std::string& path, int& exit_code) {
  blc::BLDatum datum;
  try {
    datum = blc::read_datum_file(path);
    const auto report = blc::validate_datum(datum);
    if (!report.ok()) {
      for (const auto& v : report.violations) std::cerr << "violation [" << v.code << "] " << v.message << "\n";
      exit_code = kExitInvalid;
      return std::nullopt;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    exit_code = kExitIo;
    return std::nullopt;
  }
  return datum;
}

bool write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return true;
  }
  std::ofstream out(path);
  if (!out) {
    std::cerr << "error: cannot write '" << path << "'\n";
    return false;
  }
  out << text;
  return static_cast<bool>(out);
}

int cmd_validate(const Options& o) {
  blc::BLDatum datum;
  try {
    datum = blc::read_datum_file(o.file);
    const auto report = blc::validate_datum(datum);
    if (report.ok()) {
      std::cout << "ok: n = " << datum.n << ", m = " << datum.m()
                << ", scaling defect = " << fmt(blc::scaling_defect(datum), 12) << "\n";
      return kExitOk;
    }
    std::cout << "invalid: " << report.violations.size() << " violation(s)\n";
    for (const auto& v : report.violations) {
      std::cout << "  [" << v.code << "] " << v.message << "\n";
    }
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

int cmd_check(const Options& o) {
  int code = kExitOk;
  auto datum = load(o.file, code);
  if (!datum) return code;
  const auto verdict = blc::decide_finiteness(*datum, o.budget, o.seed);
  std::cout << blc::describe(verdict) << "\n";
  switch (verdict.status) {
    case blc::FinitenessStatus::Finite:
      return kExitOk;
    case blc::FinitenessStatus::Infinite:
      return kExitInfinite;
    case blc::FinitenessStatus::Unknown:
      std::cout << "no violating subspace found; general-rank search cannot prove finiteness\n";
      return kExitUnknown;
  }
  return kExitUnknown;
}

void print_report(const blc::OptimizeReport& r) {
  std::cout << "method: " << r.method << "\n";
  if (!r.finite()) {
    std::cout << "BL   = +inf (" << blc::to_string(r.outcome) << ")\n";
    if (r.verdict && r.verdict->certificate) std::cout << blc::describe(*r.verdict) << "\n";
    if (r.divergence) {
      std::cout << "divergence direction u (log lambda):";
      for (Eigen::Index k = 0; k < r.divergence->u.size(); ++k) std::cout << " " << fmt(r.divergence->u(k), 6);
      std::cout << "  gap " << fmt(r.divergence->gap, 6) << "\n";
    }
    if (!r.note.empty()) std::cout << "note: " << r.note << "\n";
    return;
  }
  std::cout << "BL   = " << fmt(r.value) << "\n";
  std::cout << "BL^2 = " << fmt(r.value * r.value) << "\n";
  std::cout << "converged: " << (r.converged ? "yes" : "no") << " (iterations " << r.iterations
            << ", gradient " << fmt(r.gradient_norm, 3) << ", starts " << r.starts_used
            << ", best start " << r.best_start << ")\n";
  if (r.verdict) std::cout << "finiteness: " << blc::to_string(r.verdict->status) << "\n";
}

int cmd_compute(const Options& o) {
  int code = kExitOk;
  auto datum = load(o.file, code);
  if (!datum) return code;
  const auto config = solver_config(o);
  try {
    if (o.both) {
      const auto lieb = blc::compute_constant(*datum, blc::Method::Lieb, config);
      const auto barthe = blc::compute_constant(*datum, blc::Method::Barthe, config);
      print_report(lieb);
      print_report(barthe);
      if (!lieb.finite() || !barthe.finite()) return kExitInfinite;
      const double diff = std::abs(lieb.value - barthe.value);
      std::cout << "discrepancy: " << fmt(diff, 6) << " (relative "
                << fmt(diff / std::max(lieb.value, barthe.value), 6) << ")\n";
      return kExitOk;
    }
    const auto report = blc::compute_constant(*datum, blc::parse_method(o.method), config);
    print_report(report);
    return report.finite() ? kExitOk : kExitInfinite;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

int cmd_probe(const Options& o) {
  int code = kExitOk;
  auto a = load(o.file, code);
  if (!a) return code;
  auto b = load(o.file_b, code);
  if (!b) return code;
  if (o.grid < 2) {
    std::cerr << "error: --grid must be at least 2\n";
    return kExitIo;
  }
  try {
    const blc::DatumPath path(*a, *b, blc::parse_method(o.method), solver_config(o));
    const auto samples = path.sample_grid(o.grid);
    if (!write_output(o.out, blc::path_csv(samples))) return kExitIo;
    if (o.slopes) {
      const auto s = blc::one_sided_slopes(path, *o.slopes, o.h);
      std::ostream& os = o.out.empty() ? std::cerr : std::cout;
      os << "slopes at t0 = " << fmt(*o.slopes, 12) << " (h = " << fmt(o.h, 6)
         << "): left = " << fmt(s.left, 8) << ", right = " << fmt(s.right, 8) << "\n";
    }
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfinite;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}

int cmd_example(const Options& o) {
  blc::FamilyParams params;
  params.n = o.family_n;
  params.m = o.family_m;
  params.a = o.family_a;
  params.p = o.family_p;
  blc::BLDatum datum;
  try {
    datum = blc::builtin_datum(o.family, params);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  if (o.emit) return write_output(o.out, blc::datum_to_json(datum)) ? kExitOk : kExitIo;
  std::cout << o.family << ": n = " << datum.n << ", m = " << datum.m()
            << ", scaling defect = " << fmt(blc::scaling_defect(datum), 12) << "\n";
  for (int j = 0; j < datum.m(); ++j) {
    const auto& map = datum.maps[static_cast<std::size_t>(j)];
    std::cout << "  map " << j + 1 << ": p = " << fmt(map.p, 12) << ", L =";
    for (Eigen::Index r = 0; r < map.matrix.rows(); ++r) {
      std::cout << " (";
      for (Eigen::Index c = 0; c < map.matrix.cols(); ++c) std::cout << (c ? ", " : "") << fmt(map.matrix(r, c), 12);
      std::cout << ")";
    }
    std::cout << "\n";
  }
  return kExitOk;
}

int cmd_dump_weights(const Options& o) {
  int code = kExitOk;
  auto datum = load(o.file, code);
  if (!datum) return code;
  try {
    std::vector<int> dims;
    for (const auto& map : datum->maps) dims.push_back(map.target_dim());
    auto rotations = blc::linalg::RotationParams::identity(dims);
    if (!o.angles.empty()) {
      rotations = blc::linalg::RotationParams::unflatten(
          dims, Eigen::Map<const Eigen::VectorXd>(o.angles.data(), static_cast<Eigen::Index>(o.angles.size())));
    }
    const auto weights = blc::compute_dI(*datum, rotations);
    return write_output(o.out, blc::weights_csv(weights)) ? kExitOk : kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

void add_solver_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--method", o.method, "lieb, barthe or auto")->check(CLI::IsMember({"lieb", "barthe", "auto"}));
  cmd->add_option("--starts", o.starts, "optimizer starts")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", o.max_iter, "iteration budget per start")->check(CLI::PositiveNumber);
  cmd->add_option("--tol", o.tol, "gradient tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--budget", o.budget, "finiteness search budget")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Brascamp-Lieb constants: finiteness, computation, continuity probes"};
  app.require_subcommand(1);
  Options o;

  auto* validate = app.add_subcommand("validate", "check a datum file against the datum invariants");
  validate->add_option("file", o.file)->required();

  auto* check = app.add_subcommand("check", "decide finiteness and print a certificate");
  check->add_option("file", o.file)->required();
  check->add_option("--budget", o.budget, "candidate subspace budget")->check(CLI::PositiveNumber);
  check->add_option("--seed", o.seed, "random seed");

  auto* compute = app.add_subcommand("compute", "compute the best constant");
  compute->add_option("file", o.file)->required();
  add_solver_flags(compute, o);
  compute->add_flag("--both", o.both, "run both formulations and report their discrepancy");

  auto* probe = app.add_subcommand("probe", "sample the constant along the segment between two data");
  probe->add_option("file_a", o.file)->required();
  probe->add_option("file_b", o.file_b)->required();
  add_solver_flags(probe, o);
  probe->add_option("--grid", o.grid, "number of samples");
  probe->add_option("--out", o.out, "CSV output path (default stdout)");
  probe->add_option("--slopes", o.slopes, "print one-sided slopes at this t");
  probe->add_option("--step", o.h, "difference step for --slopes")->check(CLI::PositiveNumber);

  auto* example = app.add_subcommand("example", "built-in data: holder, loomis-whitney, young, four-linear, parallel");
  example->add_option("name", o.family)->required();
  example->add_option("--n", o.family_n, "ambient dimension");
  example->add_option("--m", o.family_m, "number of maps");
  example->add_option("--a", o.family_a, "four-linear parameter");
  example->add_option("--p", o.family_p, "exponent override")->delimiter(',');
  example->add_flag("--emit", o.emit, "write the datum as JSON");
  example->add_option("--out", o.out, "output path (default stdout)");

  auto* dump = app.add_subcommand("dump-weights", "write d_I and q_I as CSV");
  dump->add_option("file", o.file)->required();
  dump->add_option("--angles", o.angles, "flattened rotation parameters")->delimiter(',');
  dump->add_option("--out", o.out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitIo;
  }

  try {
    if (*validate) return cmd_validate(o);
    if (*check) return cmd_check(o);
    if (*compute) return cmd_compute(o);
    if (*probe) return cmd_probe(o);
    if (*example) return cmd_example(o);
    if (*dump) return cmd_dump_weights(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitIo;
}
