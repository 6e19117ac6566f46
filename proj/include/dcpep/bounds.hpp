#pragma once

#include "dcpep/errors.hpp"

namespace dcpep {

// Sublinear worst-case bound for boosted DCA with both components in F_{mu,L}:
//   min_k ||g1(x^k) - g2(x^k)||^2 <= L Delta / ((1 + kappa alpha) N + 1/(2(1-kappa)))
// valid for 0 <= alpha <= min{1, 2 kappa}.
struct SublinearBound {
  double kappa = 0.0;
  double alpha = 0.0;
  int N = 1;
  double L = 1.0;
  double delta = 1.0;
  double value = 0.0;
};

// Linear rate for one boosted gradient step under the PL condition:
//   f(x^2) - f* <= beta (f(x^1) - f*),
//   beta = kappa alpha^2 - (kappa(2-2kappa)/(kappa+2)) alpha + (2-2kappa)/(2+kappa)
// with kappa = eta/L.
struct LinearRate {
  double kappa = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

// Vertex of the beta parabola and the associated quantities.
struct OptimalBoost {
  double alpha_star = 0.0;
  double rate = 0.0;
  double step_length_times_L = 0.0;
};

SublinearBound dca_sublinear_bound(double mu, double L, int N, double alpha,
                                   double delta);

// Largest alpha for which the linear-rate analysis applies (the aggregation
// multiplier on the PL row at x^1 stays nonnegative up to this root).
double gd_pl_alpha_max(double kappa);

LinearRate gd_pl_rate(double kappa, double alpha);

OptimalBoost optimal_boost(double kappa);

// Previously best known step length for gradient descent under PL:
// min{3/(2L), 2/((1+sqrt(kappa)) L)}.
double prior_step_length(double kappa, double L);

}  // namespace dcpep
