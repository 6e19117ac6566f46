#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "dcpep/dca_engine.hpp"
#include "dcpep/pep_model.hpp"
#include "dcpep/sdp_backend.hpp"

namespace dcpep {

// All data of one boosted iteration with both components in F_{mu,L}: the
// points x^k and y^k, gradients, and function values. x^{k+1} is never
// stored, only derived, and `shared` is the single vector serving as both
// g1(y^k) and g2(x^k), so the step and subproblem-optimality links hold
// structurally. Every stored quantity is otherwise free.
struct OneIterSample {
  int dim = 0;
  Vector x_k, y_k;
  Vector g1_xk, g1_xk1, g2_yk, g2_xk1;
  Vector shared;
  double f1_xk = 0.0, f1_yk = 0.0, f1_xk1 = 0.0;
  double f2_xk = 0.0, f2_xk1 = 0.0;
  double mu = 0.0, L = 1.0, alpha = 0.0;

  Vector x_k1() const { return y_k + alpha * (y_k - x_k); }
};

// Aggregation weights for the five interpolation rows of the one-iteration
// analysis, in the pair order (x^k,y^k), (y^k,x^k), (x^{k+1},y^k),
// (y^k,x^{k+1}) on f1 and (x^{k+1},x^k) on f2.
struct MultiplierTable {
  double lam_1_xk_yk = 0.0;
  double lam_1_yk_xk = 0.0;
  double lam_1_xk1_yk = 0.0;
  double lam_1_yk_xk1 = 0.0;
  double lam_2_xk1_xk = 0.0;
};

// (1 + 2 alpha mu / L, 2 alpha mu / L, 1/alpha - 1, 1/alpha, 1); requires
// 0 < alpha <= 1 since two entries contain 1/alpha.
MultiplierTable one_iter_multipliers(double mu, double L, double alpha);

// Weights of the three explicit squared-norm terms that close the
// one-iteration aggregation. All three are nonnegative exactly on
// 0 < alpha <= 2 mu / L (c2 vanishes at the right endpoint, c3 at mu = 0).
struct SosCoefficients {
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;
};

SosCoefficients sos_coefficients(double mu, double L, double alpha);

// |sum of multiplier-weighted interpolation residuals - aggregated
// right-hand side|. Zero for every sample up to rounding: the aggregation is
// an algebraic identity in the free vectors and values, not an inequality.
double verify_one_iteration_identity(const OneIterSample& sample);

// Slack of the one-iteration inequality at every step of a run, plus the
// slack of the summed target inequality. `final` equals L times the sum of
// per_step entries identically, so both stay nonnegative together.
struct ChainSlacks {
  std::vector<double> per_step;
  double final = 0.0;
};

ChainSlacks verify_descent_chain(const TrajectoryReport& trajectory, double mu,
                                 double L, double alpha);

// |six-line aggregation - closing squared norm| for the one-step linear-rate
// proof of boosted gradient descent under PL with modulus eta = kappa L.
// Derived points: x^1 = 0, y^1 = g2_x1 / L, x^2 = (1 + alpha) y^1; the three
// gradients of f2 and its three values are free.
double verify_gd_pl_identity(double alpha, double L, double eta,
                             const Vector& g2_x1, const Vector& g2_y1,
                             const Vector& g2_x2, double f2_x1, double f2_y1,
                             double f2_x2);

// Dual values worth reading: magnitude above 1e-9, keyed and ordered by
// constraint label. No exact-value contract; normalization differs from the
// closed-form multiplier table.
std::map<ConstraintLabel, double> extract_dual_multipliers(
    const SolveResult& result);

// Randomized residual sweep over one identity family. Residuals are
// normalized per sample by 1 + the largest absolute term in the sum, since
// cancellation error grows with term size.
struct IdentitySweep {
  int samples = 0;
  double max_residual = 0.0;
  double min_multiplier = 0.0;
  double min_coefficient = 0.0;
};

// Samples: dim uniform in {1..max_dim}, vector entries and values standard
// normal, L log-uniform in [0.1, 10], kappa uniform, alpha uniform in the
// admissible interval of the respective identity.
IdentitySweep one_iteration_identity_sweep(int samples, int max_dim,
                                           std::uint64_t seed);
IdentitySweep gd_pl_identity_sweep(int samples, int max_dim,
                                   std::uint64_t seed);

// Chain slacks over random strongly convex quadratic runs; also tracks the
// worst gap in the final = L * sum(per_step) link.
struct ChainSweep {
  int trials = 0;
  double min_per_step = 0.0;
  double min_final = 0.0;
  double max_link_gap = 0.0;
};

ChainSweep descent_chain_sweep(int trials, int dim, std::uint64_t seed);

}  // namespace dcpep
