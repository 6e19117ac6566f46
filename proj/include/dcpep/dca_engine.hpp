#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dcpep/pep_model.hpp"

namespace dcpep {

// Oracle bundle for f = f1 - f2. solve_linearized(g) must return the
// minimizer of f1(x) - <g, x>; the runners check its Fermat residual
// f1_subgrad(y) = g on every call and refuse to continue from a bad
// subproblem solution. class1/class2 record the declared membership; the
// engine trusts the declaration and only run-level interpolation checks
// catch lies. dim = 0 marks dimension-agnostic oracles (runs then size
// themselves from x1).
struct DCInstance {
  int dim = 0;
  std::function<double(const Vector&)> f1_value, f2_value;
  std::function<Vector(const Vector&)> f1_subgrad, f2_subgrad;
  std::function<Vector(const Vector&)> solve_linearized;
  CurvatureClass class1, class2;
};

// f_l(x) = x' A_l x / 2 + b_l' x + c_l. Construction verifies
// mu_l I <= A_l <= L_l I through extreme eigenvalues and requires A1
// positive definite so the linearized subproblem has a unique solution.
struct QuadraticDC {
  Matrix A1, A2;
  Vector b1, b2;
  double c1 = 0.0, c2 = 0.0;
  CurvatureClass class1, class2;

  QuadraticDC(Matrix A1_, Vector b1_, double c1_, const CurvatureClass& cls1,
              Matrix A2_, Vector b2_, double c2_, const CurvatureClass& cls2);

  int dim() const { return static_cast<int>(b1.size()); }

  // Packages the quadratic as oracles; the subproblem is a direct symmetric
  // solve of A1 y = g - b1.
  DCInstance instance() const;
};

// Eigenvalue window for random instance generation.
struct SpectrumRange {
  double lo = 0.0;
  double hi = 1.0;
};

// Random member of the declared classes: orthogonal eigenvectors, eigenvalues
// uniform in the given range (default: the full class interval, with a
// positive floor for A1), Gaussian linear and constant terms.
QuadraticDC random_quadratic_dc(int dim, const CurvatureClass& class1,
                                const CurvatureClass& class2, std::uint64_t seed,
                                std::optional<SpectrumRange> spectrum1 = std::nullopt,
                                std::optional<SpectrumRange> spectrum2 = std::nullopt);

// Global minimum of f = f1 - f2 for a quadratic pair; requires A1 - A2
// positive definite, otherwise the infimum is not attained (DegenerateError).
double dc_minimum(const QuadraticDC& q);

// Text round-trip: "quadratic-dc 1" magic, then dim, both class parameter
// pairs, and the matrices/vectors/constants in fixed order. The loader
// re-runs the constructor, so eigenvalue bounds are validated on read.
QuadraticDC load_quadratic_dc(std::istream& in);
QuadraticDC load_quadratic_dc(const std::string& path);
void save_quadratic_dc(const QuadraticDC& q, std::ostream& out);
void save_quadratic_dc(const QuadraticDC& q, const std::string& path);

// Everything one run produces: iterates x^1..x^{N+1}, subproblem solutions
// y^1..y^N, both gradients and f = f1 - f2 at every x^k, and the criticality
// measure min_k ||g1(x^k) - g2(x^k)||^2.
struct TrajectoryReport {
  std::vector<Vector> x, y;
  std::vector<Vector> g1_x, g2_x;
  std::vector<double> f_x;
  double measure = 0.0;
  CurvatureClass class1, class2;
  double alpha = 0.0;
  int N = 0;
};

// Boosted run: y^k solves the linearized subproblem at x^k, then
// x^{k+1} = y^k + alpha (y^k - x^k) verbatim. Exactly N iterations, no early
// stopping.
TrajectoryReport run_bdca(const DCInstance& instance, const Vector& x1, int N,
                          double alpha);

// Plain DCA; forwards to run_bdca with alpha = 0, so the two agree
// bit-for-bit.
TrajectoryReport run_dca(const DCInstance& instance, const Vector& x1, int N);

// Value and gradient of one smooth function.
struct SmoothOracle {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> grad;
};

// Splits an L-smooth f as f1 = (L/2)||x||^2, f2 = (L/2)||x||^2 - f, with the
// closed-form subproblem solve_linearized(g) = g / L. A boosted run on the
// result is gradient descent with step (1 + alpha) / L.
DCInstance gd_as_dca(const SmoothOracle& smooth_f, double L);

// min over k of (-mu ||d^k||^2 - <grad_f(y^k), d^k>) with d^k = y^k - x^k;
// nonnegative up to rounding whenever both components have minimum curvature
// mu.
double check_descent_direction(const TrajectoryReport& trajectory,
                               const std::function<Vector(const Vector&)>& grad_f,
                               double mu);

// One boosted step on an instance from gd_as_dca. Returns
// (f(x^2) - f*) / (f(x^1) - f*) under the f* = 0 normalization (0 by
// convention when the start is already optimal) and checks the ratio against
// gd_pl_rate(eta / L, alpha); a breach means the caller's PL claim was false.
double pl_ratio_check(const DCInstance& instance, double eta, const Vector& x1,
                      double alpha);

// Subproblem fallback for 1-D instances without a closed form: brackets the
// monotone optimality condition f1'(y) = g and bisects it.
std::function<Vector(const Vector&)> bisection_linearized(
    std::function<Vector(const Vector&)> f1_subgrad);

}  // namespace dcpep
