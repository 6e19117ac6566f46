#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>
#include <string>

#include "dcpep/bounds.hpp"
#include "dcpep/dca_engine.hpp"
#include "dcpep/errors.hpp"
#include "dcpep/gram_builder.hpp"
#include "dcpep/pep_model.hpp"
#include "dcpep/proof_certificates.hpp"
#include "dcpep/sdp_backend.hpp"

namespace py = pybind11;
using namespace dcpep;

namespace {

SDPInstance dca_instance(double mu1, double L1, double mu2, double L2, int N,
                         double alpha, double delta,
                         std::optional<double> pl_eta) {
  const auto problem = build_pep(CurvatureClass(mu1, L1), CurvatureClass(mu2, L2),
                                 MethodConfig(N, alpha), delta, pl_eta);
  return emit_sdp(problem, assign_basis(problem));
}

const char* status_name(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::Infeasible:
      return "infeasible";
    case SolveStatus::Unbounded:
      return "unbounded";
    case SolveStatus::NumericalTrouble:
      return "numerical_trouble";
  }
  return "unknown";
}

py::dict solve_to_dict(const SDPInstance& inst, double tol) {
  const SolveResult res = solve(inst, tol);
  py::dict out;
  out["value"] = res.opt_value;
  out["status"] = status_name(res.status);
  out["gap"] = res.gap;
  out["iterations"] = res.iterations;
  out["residual"] = check_solution(inst, res);
  return out;
}

QuadraticDC make_quadratic(const Matrix& A1, const Vector& b1, double c1,
                           double mu1, double L1, const Matrix& A2,
                           const Vector& b2, double c2, double mu2, double L2) {
  return QuadraticDC(A1, b1, c1, CurvatureClass(mu1, L1), A2, b2, c2,
                     CurvatureClass(mu2, L2));
}

py::dict run_to_dict(const TrajectoryReport& run) {
  py::dict out;
  out["x"] = run.x;
  out["y"] = run.y;
  out["f"] = run.f_x;
  out["g1"] = run.g1_x;
  out["g2"] = run.g2_x;
  out["measure"] = run.measure;
  out["alpha"] = run.alpha;
  out["N"] = run.N;
  return out;
}

py::dict identity_sweep_to_dict(const IdentitySweep& sweep) {
  py::dict out;
  out["samples"] = sweep.samples;
  out["max_residual"] = sweep.max_residual;
  out["min_multiplier"] = sweep.min_multiplier;
  out["min_coefficient"] = sweep.min_coefficient;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "native worst-case estimation core for DCA and boosted DCA";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const SolverFailure& e) {
      PyErr_SetString(PyExc_RuntimeError, e.what());
    } catch (const FactorizationError& e) {
      PyErr_SetString(PyExc_RuntimeError, e.what());
    } catch (const IoError& e) {
      PyErr_SetString(PyExc_OSError, e.what());
    } catch (const Error& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def(
      "solve_pep",
      [](double mu1, double L1, double mu2, double L2, int N, double alpha,
         double delta, std::optional<double> pl_eta, double tol) {
        return solve_to_dict(dca_instance(mu1, L1, mu2, L2, N, alpha, delta, pl_eta),
                             tol);
      },
      py::arg("mu1"), py::arg("L1"), py::arg("mu2"), py::arg("L2"), py::arg("N"),
      py::arg("alpha"), py::arg("delta"), py::arg("pl_eta") = std::nullopt,
      py::arg("tol") = 1e-8,
      "Worst-case criticality measure of N boosted DCA steps on "
      "F_{mu1,L1} - F_{mu2,L2} with initial gap delta.");

  m.def(
      "solve_gd_pl_pep",
      [](double kappa, double alpha, double L, double delta, double tol) {
        return solve_to_dict(build_gd_pl_pep(kappa, alpha, L, delta), tol);
      },
      py::arg("kappa"), py::arg("alpha"), py::arg("L") = 1.0,
      py::arg("delta") = 1.0, py::arg("tol") = 1e-7,
      "One-step worst case of boosted gradient descent under the PL "
      "condition with modulus kappa L.");

  m.def(
      "sdpa_text",
      [](double mu1, double L1, double mu2, double L2, int N, double alpha,
         double delta, std::optional<double> pl_eta) {
        std::ostringstream out;
        export_interchange(dca_instance(mu1, L1, mu2, L2, N, alpha, delta, pl_eta),
                           out);
        return out.str();
      },
      py::arg("mu1"), py::arg("L1"), py::arg("mu2"), py::arg("L2"), py::arg("N"),
      py::arg("alpha"), py::arg("delta"), py::arg("pl_eta") = std::nullopt,
      "The same instance in SDPA sparse format (.dat-s).");

  m.def(
      "dca_bound",
      [](double mu, double L, int N, double alpha, double delta) {
        return dca_sublinear_bound(mu, L, N, alpha, delta).value;
      },
      py::arg("mu"), py::arg("L"), py::arg("N"), py::arg("alpha"),
      py::arg("delta"), "Closed-form sublinear worst-case bound.");

  m.def(
      "gd_pl_beta",
      [](double kappa, double alpha) { return gd_pl_rate(kappa, alpha).beta; },
      py::arg("kappa"), py::arg("alpha"),
      "One-step linear rate beta(kappa, alpha).");

  m.def("gd_pl_alpha_max", &gd_pl_alpha_max, py::arg("kappa"),
        "Largest admissible boost step for the PL rate.");

  m.def(
      "optimal_boost",
      [](double kappa) {
        const OptimalBoost best = optimal_boost(kappa);
        return py::make_tuple(best.alpha_star, best.rate, best.step_length_times_L);
      },
      py::arg("kappa"),
      "(alpha_star, rate, step_length_times_L) minimizing beta.");

  m.def("prior_step_length", &prior_step_length, py::arg("kappa"), py::arg("L"),
        "Longest step length covered by earlier fixed-step analyses.");

  m.def(
      "one_iteration_identity_sweep",
      [](int samples, int max_dim, std::uint64_t seed) {
        return identity_sweep_to_dict(one_iteration_identity_sweep(samples, max_dim, seed));
      },
      py::arg("samples") = 1000, py::arg("max_dim") = 8, py::arg("seed") = 7,
      "Randomized check of the one-iteration proof identity.");

  m.def(
      "gd_pl_identity_sweep",
      [](int samples, int max_dim, std::uint64_t seed) {
        return identity_sweep_to_dict(gd_pl_identity_sweep(samples, max_dim, seed));
      },
      py::arg("samples") = 1000, py::arg("max_dim") = 8, py::arg("seed") = 7,
      "Randomized check of the gd-pl proof identity.");

  m.def(
      "descent_chain_sweep",
      [](int trials, int dim, std::uint64_t seed) {
        const ChainSweep sweep = descent_chain_sweep(trials, dim, seed);
        py::dict out;
        out["trials"] = sweep.trials;
        out["min_per_step"] = sweep.min_per_step;
        out["min_final"] = sweep.min_final;
        out["max_link_gap"] = sweep.max_link_gap;
        return out;
      },
      py::arg("trials") = 100, py::arg("dim") = 3, py::arg("seed") = 2024,
      "Randomized check of the chained descent inequalities on real runs.");

  m.def(
      "run_bdca",
      [](const Matrix& A1, const Vector& b1, double c1, double mu1, double L1,
         const Matrix& A2, const Vector& b2, double c2, double mu2, double L2,
         const Vector& x1, int N, double alpha) {
        const QuadraticDC q =
            make_quadratic(A1, b1, c1, mu1, L1, A2, b2, c2, mu2, L2);
        return run_to_dict(run_bdca(q.instance(), x1, N, alpha));
      },
      py::arg("A1"), py::arg("b1"), py::arg("c1"), py::arg("mu1"), py::arg("L1"),
      py::arg("A2"), py::arg("b2"), py::arg("c2"), py::arg("mu2"), py::arg("L2"),
      py::arg("x1"), py::arg("N"), py::arg("alpha") = 0.0,
      "Boosted DCA on the quadratic pair f_l = x'A_l x/2 + b_l'x + c_l.");

  m.def(
      "run_instance_file",
      [](const std::string& path, const Vector& x1, int N, double alpha) {
        const QuadraticDC q = load_quadratic_dc(path);
        return run_to_dict(run_bdca(q.instance(), x1, N, alpha));
      },
      py::arg("path"), py::arg("x1"), py::arg("N"), py::arg("alpha") = 0.0,
      "Boosted DCA on a quadratic-dc instance file.");

  m.def(
      "dc_minimum",
      [](const Matrix& A1, const Vector& b1, double c1, double mu1, double L1,
         const Matrix& A2, const Vector& b2, double c2, double mu2, double L2) {
        return dc_minimum(make_quadratic(A1, b1, c1, mu1, L1, A2, b2, c2, mu2, L2));
      },
      py::arg("A1"), py::arg("b1"), py::arg("c1"), py::arg("mu1"), py::arg("L1"),
      py::arg("A2"), py::arg("b2"), py::arg("c2"), py::arg("mu2"), py::arg("L2"),
      "Global minimum of the quadratic difference (requires A1 - A2 > 0).");
}
