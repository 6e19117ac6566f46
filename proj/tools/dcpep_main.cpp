#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dcpep/bounds.hpp"
#include "dcpep/dca_engine.hpp"
#include "dcpep/gram_builder.hpp"
#include "dcpep/pep_model.hpp"
#include "dcpep/proof_certificates.hpp"
#include "dcpep/sdp_backend.hpp"

namespace {

using namespace dcpep;

constexpr int kExitOk = 0;
constexpr int kExitAssertion = 1;
constexpr int kExitUsage = 2;
constexpr int kExitSolver = 3;

double default_tolerance() {
  if (const char* env = std::getenv("DCPEP_SOLVER_TOL")) {
    char* end = nullptr;
    const double tol = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(tol > 0.0) || !std::isfinite(tol)) {
      throw ParameterError(std::string("DCPEP_SOLVER_TOL is not a positive "
                                       "number: '") +
                           env + "'");
    }
    return tol;
  }
  return 1e-8;
}

std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

struct PepFlags {
  double mu1 = 0.0, L1 = 1.0, mu2 = 0.0, L2 = 1.0;
  int N = 1;
  double alpha = 0.0;
  double delta = 1.0;
  double pl_eta = 0.0;  // 0 disables the PL rows
  double tol = 0.0;     // 0 means: environment override or 1e-8
};

void add_pep_flags(CLI::App* cmd, PepFlags* flags) {
  cmd->add_option("--mu1", flags->mu1, "minimum curvature of f1")->required();
  cmd->add_option("--L1", flags->L1, "maximum curvature of f1")->required();
  cmd->add_option("--mu2", flags->mu2, "minimum curvature of f2")->required();
  cmd->add_option("--L2", flags->L2, "maximum curvature of f2")->required();
  cmd->add_option("--N", flags->N, "iteration count")->required();
  cmd->add_option("--alpha", flags->alpha, "boost step length");
  cmd->add_option("--delta", flags->delta, "initial objective gap bound");
  cmd->add_option("--pl-eta", flags->pl_eta, "PL modulus (adds PL rows)");
  cmd->add_option("--tol", flags->tol, "solver tolerance");
}

struct PepSolveOutput {
  PEPProblem problem;
  BasisMap basis;
  SDPInstance sdp;
  SolveResult result;
};

// Builds, optionally exports, and solves one worst-case instance. A stalled
// solve that still produced a balanced iterate is reported on stderr and
// used anyway; its value is accurate far beyond the achieved residuals.
PepSolveOutput solve_pep_instance(const PepFlags& flags,
                                  const std::string& sdpa_path) {
  PepSolveOutput out;
  std::optional<double> pl;
  if (flags.pl_eta != 0.0) pl = flags.pl_eta;
  out.problem = build_pep(CurvatureClass(flags.mu1, flags.L1),
                          CurvatureClass(flags.mu2, flags.L2),
                          MethodConfig(flags.N, flags.alpha), flags.delta, pl);
  out.basis = assign_basis(out.problem);
  out.sdp = emit_sdp(out.problem, out.basis);
  if (!sdpa_path.empty()) export_interchange(out.sdp, sdpa_path);
  const double tol = flags.tol > 0.0 ? flags.tol : default_tolerance();
  out.result = solve(out.sdp, tol);
  switch (out.result.status) {
    case SolveStatus::Optimal:
      break;
    case SolveStatus::NumericalTrouble:
      std::cerr << "note: solver stalled at gap " << out.result.gap
                << "; using its best iterate\n";
      break;
    case SolveStatus::Infeasible:
      throw SolverFailure("instance reported infeasible");
    case SolveStatus::Unbounded:
      throw SolverFailure("instance reported unbounded");
  }
  return out;
}

int cmd_pep_solve(const PepFlags& flags, const std::string& out_path,
                  const std::string& sdpa_path, bool certificate) {
  const PepSolveOutput out = solve_pep_instance(flags, sdpa_path);
  std::cout << fmt(out.result.opt_value) << "\n";
  if (!out_path.empty()) {
    std::ofstream csv(out_path);
    if (!csv) throw IoError("cannot write " + out_path);
    csv << "mu1,L1,mu2,L2,N,alpha,delta,OPT_Value\n";
    csv << fmt(flags.mu1) << "," << fmt(flags.L1) << "," << fmt(flags.mu2)
        << "," << fmt(flags.L2) << "," << flags.N << "," << fmt(flags.alpha)
        << "," << fmt(flags.delta) << "," << fmt(out.result.opt_value) << "\n";
  }
  if (certificate) {
    const Certificate cert =
        reconstruct_certificate(out.problem, out.basis, out.result);
    std::cout << "certificate dimension " << cert.dimension
              << " max_residual " << cert.max_residual << "\n";
    const auto dump = [&](int func,
                          const std::map<PointLabel, DiscreteTriple>& triples) {
      for (const auto& [label, triple] : triples) {
        std::cout << "f" << func << " " << label.name() << " value "
                  << fmt(triple.value) << " point";
        for (int i = 0; i < triple.point.size(); ++i)
          std::cout << " " << fmt(triple.point[i]);
        std::cout << " grad";
        for (int i = 0; i < triple.grad.size(); ++i)
          std::cout << " " << fmt(triple.grad[i]);
        std::cout << "\n";
      }
    };
    dump(1, cert.triples1);
    dump(2, cert.triples2);
  }
  return kExitOk;
}

// Parses "start:step:end" (or "start:end" with unit step) into grid values.
std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> parts;
  std::stringstream in(text);
  std::string piece;
  while (std::getline(in, piece, ':')) {
    char* end = nullptr;
    const double v = std::strtod(piece.c_str(), &end);
    if (end == piece.c_str() || *end != '\0' || !std::isfinite(v)) {
      throw ParameterError("malformed grid component '" + piece + "'");
    }
    parts.push_back(v);
  }
  double start = 0.0, step = 1.0, stop = -1.0;
  if (parts.size() == 2) {
    start = parts[0];
    stop = parts[1];
  } else if (parts.size() == 3) {
    start = parts[0];
    step = parts[1];
    stop = parts[2];
  } else {
    throw ParameterError("grid must be start:end or start:step:end, got '" +
                         text + "'");
  }
  if (!(step > 0.0)) throw ParameterError("grid step must be positive");
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    const double v = start + i * step;
    if (v > stop + 1e-12) break;
    grid.push_back(v);
  }
  if (grid.empty()) throw ParameterError("grid '" + text + "' is empty");
  return grid;
}

int cmd_sweep(PepFlags flags, const std::string& axis, const std::string& grid_text,
              const std::string& out_path) {
  const std::vector<double> grid = parse_grid(grid_text);
  std::ostringstream csv;
  if (axis == "alpha") {
    csv << "alpha,OPT_Value\n";
    for (double alpha : grid) {
      flags.alpha = alpha;
      const PepSolveOutput out = solve_pep_instance(flags, "");
      csv << fmt(alpha) << "," << fmt(out.result.opt_value) << "\n";
    }
  } else if (axis == "N") {
    csv << "N,OPT_Value\n";
    for (double point : grid) {
      const int N = static_cast<int>(point);
      if (point != N) throw ParameterError("N grid must contain integers");
      flags.N = N;
      const PepSolveOutput out = solve_pep_instance(flags, "");
      csv << N << "," << fmt(out.result.opt_value) << "\n";
    }
  } else {
    throw ParameterError("--sweep must be alpha or N, got '" + axis + "'");
  }
  // rows are buffered, so a failed grid point leaves no partial file behind
  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot write " + out_path);
    out << csv.str();
  }
  return kExitOk;
}

int cmd_verify(const std::string& which, int samples, int dims,
               std::uint64_t seed) {
  bool ok = true;
  const auto report = [&](const char* name, const IdentitySweep& sweep,
                          double residual_tol) {
    const bool pass = sweep.max_residual <= residual_tol &&
                      sweep.min_multiplier >= 0.0 && sweep.min_coefficient >= 0.0;
    std::cout << name << ": max residual " << sweep.max_residual
              << ", min multiplier " << sweep.min_multiplier
              << ", min coefficient " << sweep.min_coefficient << " -> "
              << (pass ? "ok" : "BREACH") << "\n";
    ok = ok && pass;
  };
  if (which == "one-iter" || which == "all") {
    report("one-iter", one_iteration_identity_sweep(samples, dims, seed), 1e-8);
  }
  if (which == "gd-pl" || which == "all") {
    report("gd-pl", gd_pl_identity_sweep(samples, dims, seed), 1e-8);
  }
  if (which == "chain" || which == "all") {
    const ChainSweep sweep = descent_chain_sweep(samples, dims, seed);
    const bool pass = sweep.min_per_step >= -1e-9 && sweep.min_final >= -1e-9 &&
                      sweep.max_link_gap <= 1e-12;
    std::cout << "chain: min per-step slack " << sweep.min_per_step
              << ", min final slack " << sweep.min_final << ", max link gap "
              << sweep.max_link_gap << " -> " << (pass ? "ok" : "BREACH")
              << "\n";
    ok = ok && pass;
  }
  return ok ? kExitOk : kExitAssertion;
}

int cmd_bound_dca(double mu, double L, int N, double alpha, double delta) {
  std::cout << fmt(dca_sublinear_bound(mu, L, N, alpha, delta).value) << "\n";
  return kExitOk;
}

int cmd_bound_gd_pl(double kappa, double alpha) {
  std::cout << fmt(gd_pl_rate(kappa, alpha).beta) << "\n";
  return kExitOk;
}

int cmd_bound_optimal_boost(double kappa) {
  const OptimalBoost best = optimal_boost(kappa);
  std::cout << "alpha_star " << fmt(best.alpha_star) << "\n";
  std::cout << "rate " << fmt(best.rate) << "\n";
  std::cout << "step_length_times_L " << fmt(best.step_length_times_L) << "\n";
  return kExitOk;
}

Vector parse_x1(const std::string& text) {
  std::vector<double> entries;
  std::stringstream in(text);
  std::string piece;
  while (std::getline(in, piece, ',')) {
    char* end = nullptr;
    const double v = std::strtod(piece.c_str(), &end);
    if (end == piece.c_str() || *end != '\0' || !std::isfinite(v)) {
      throw ParameterError("malformed --x1 component '" + piece + "'");
    }
    entries.push_back(v);
  }
  if (entries.empty()) throw ParameterError("--x1 must list at least one number");
  Vector x1(static_cast<int>(entries.size()));
  for (size_t i = 0; i < entries.size(); ++i) x1[static_cast<int>(i)] = entries[i];
  return x1;
}

int cmd_run(const std::string& instance_path, const std::string& x1_text, int N,
            double alpha, bool check_bounds, const std::string& out_path,
            double tol) {
  const QuadraticDC q = load_quadratic_dc(instance_path);
  const Vector x1 = parse_x1(x1_text);
  const TrajectoryReport run = run_bdca(q.instance(), x1, N, alpha);

  std::ostringstream csv;
  csv << "k,f_xk,grad_diff_norm_sq\n";
  for (int k = 0; k <= run.N; ++k) {
    csv << (k + 1) << "," << fmt(run.f_x[k]) << ","
        << fmt((run.g1_x[k] - run.g2_x[k]).squaredNorm()) << "\n";
  }
  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot write " + out_path);
    out << csv.str();
  }

  if (check_bounds) {
    const double delta = run.f_x[0] - dc_minimum(q);
    if (delta <= 0.0) {
      // started at the global minimum; the measure must vanish with it
      return run.measure <= 1e-12 ? kExitOk : kExitAssertion;
    }
    PepFlags flags;
    flags.mu1 = q.class1.mu;
    flags.L1 = q.class1.L;
    flags.mu2 = q.class2.mu;
    flags.L2 = q.class2.L;
    flags.N = N;
    flags.alpha = alpha;
    flags.delta = delta;
    flags.tol = tol;
    const PepSolveOutput out = solve_pep_instance(flags, "");
    const double budget =
        out.result.opt_value * (1.0 + 1e-4) + 1e-9 * (1.0 + delta);
    std::cerr << "measure " << run.measure << " vs worst case "
              << out.result.opt_value << "\n";
    if (run.measure > budget) {
      std::cerr << "bound check failed\n";
      return kExitAssertion;
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"worst-case estimation workbench for DCA and boosted DCA"};
  app.require_subcommand(1);
  int rc = kExitOk;

  PepFlags pep_flags;
  std::string pep_out, pep_sdpa;
  bool pep_cert = false;
  CLI::App* pep = app.add_subcommand("pep-solve", "solve one worst-case instance");
  add_pep_flags(pep, &pep_flags);
  pep->add_option("--out", pep_out, "append the result as a CSV row");
  pep->add_option("--export-sdpa", pep_sdpa, "write the instance in SDPA format");
  pep->add_flag("--certificate", pep_cert, "print the reconstructed worst case");
  pep->callback(
      [&] { rc = cmd_pep_solve(pep_flags, pep_out, pep_sdpa, pep_cert); });

  PepFlags sweep_flags;
  std::string sweep_axis, sweep_grid, sweep_out;
  CLI::App* sweep = app.add_subcommand("sweep", "tabulate OPT along a grid");
  add_pep_flags(sweep, &sweep_flags);
  sweep->get_option("--N")->required(false);
  sweep->add_option("--sweep", sweep_axis, "grid axis: alpha or N")->required();
  sweep->add_option("--grid", sweep_grid, "start:step:end (or start:end)")
      ->required();
  sweep->add_option("--out", sweep_out, "CSV output path (default: stdout)");
  sweep->callback(
      [&] { rc = cmd_sweep(sweep_flags, sweep_axis, sweep_grid, sweep_out); });

  CLI::App* bound = app.add_subcommand("bound", "evaluate the closed-form bounds");
  bound->require_subcommand(1);
  double b_mu = 0.0, b_L = 1.0, b_alpha = 0.0, b_delta = 1.0, b_kappa = 0.5;
  int b_N = 1;
  CLI::App* bound_dca = bound->add_subcommand("dca", "sublinear worst-case bound");
  bound_dca->add_option("--mu", b_mu)->required();
  bound_dca->add_option("--L", b_L)->required();
  bound_dca->add_option("--N", b_N)->required();
  bound_dca->add_option("--alpha", b_alpha)->required();
  bound_dca->add_option("--delta", b_delta)->required();
  bound_dca->callback(
      [&] { rc = cmd_bound_dca(b_mu, b_L, b_N, b_alpha, b_delta); });
  CLI::App* bound_gd = bound->add_subcommand("gd-pl", "one-step linear rate");
  bound_gd->add_option("--kappa", b_kappa)->required();
  bound_gd->add_option("--alpha", b_alpha)->required();
  bound_gd->callback([&] { rc = cmd_bound_gd_pl(b_kappa, b_alpha); });
  CLI::App* bound_best = bound->add_subcommand("optimal-boost", "rate minimizer");
  bound_best->add_option("--kappa", b_kappa)->required();
  bound_best->callback([&] { rc = cmd_bound_optimal_boost(b_kappa); });

  std::string v_which = "all";
  int v_samples = 1000, v_dims = 8;
  std::uint64_t v_seed = 7;
  CLI::App* verify = app.add_subcommand("verify", "machine-check the proofs");
  verify->add_option("--which", v_which, "one-iter, gd-pl, chain, or all")
      ->check(CLI::IsMember({"one-iter", "gd-pl", "chain", "all"}));
  verify->add_option("--samples", v_samples, "random samples per suite");
  verify->add_option("--dims", v_dims, "largest sampled dimension");
  verify->add_option("--seed", v_seed, "RNG seed");
  verify->callback([&] { rc = cmd_verify(v_which, v_samples, v_dims, v_seed); });

  std::string r_instance, r_x1, r_out;
  int r_N = 1;
  double r_alpha = 0.0, r_tol = 0.0;
  bool r_check = false;
  CLI::App* run = app.add_subcommand("run", "execute DCA/BDCA on an instance file");
  run->add_option("--instance", r_instance, "quadratic-dc instance path")
      ->required();
  run->add_option("--x1", r_x1, "start point, comma-separated")->required();
  run->add_option("--N", r_N, "iteration count")->required();
  run->add_option("--alpha", r_alpha, "boost step length");
  run->add_flag("--check-bounds", r_check,
                "also solve the matching worst case and compare");
  run->add_option("--out", r_out, "CSV output path (default: stdout)");
  run->add_option("--tol", r_tol, "solver tolerance for --check-bounds");
  run->callback([&] {
    rc = cmd_run(r_instance, r_x1, r_N, r_alpha, r_check, r_out, r_tol);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const FactorizationError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return rc;
}
