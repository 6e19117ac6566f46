#include "dcpep/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dcpep {

namespace {

std::string num(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

void require_kappa_01(double kappa, const char* who) {
  if (!std::isfinite(kappa) || kappa <= 0.0 || kappa > 1.0) {
    throw ParameterError(std::string(who) + " requires kappa in (0,1], got " +
                         num(kappa));
  }
}

}  // namespace

SublinearBound dca_sublinear_bound(double mu, double L, int N, double alpha,
                                   double delta) {
  if (!std::isfinite(mu) || !std::isfinite(L) || mu < 0.0 || !(mu < L)) {
    throw ParameterError("sublinear bound requires 0 <= mu < L, got mu=" + num(mu) +
                         ", L=" + num(L));
  }
  if (N < 1) throw ParameterError("sublinear bound requires N >= 1");
  if (!std::isfinite(delta) || delta <= 0.0) {
    throw ParameterError("sublinear bound requires delta > 0, got " + num(delta));
  }
  const double kappa = mu / L;
  const double alpha_max = std::min(1.0, 2.0 * kappa);
  if (!std::isfinite(alpha) || alpha < 0.0 || alpha > alpha_max) {
    throw ParameterError("sublinear bound requires 0 <= alpha <= min{1, 2 mu/L} = " +
                         num(alpha_max) + ", got alpha=" + num(alpha));
  }
  SublinearBound bound;
  bound.kappa = kappa;
  bound.alpha = alpha;
  bound.N = N;
  bound.L = L;
  bound.delta = delta;
  bound.value = L * delta / ((1.0 + kappa * alpha) * N + 1.0 / (2.0 * (1.0 - kappa)));
  return bound;
}

double gd_pl_alpha_max(double kappa) {
  require_kappa_01(kappa, "gd_pl_alpha_max");
  return (std::sqrt(kappa * kappa + 2.0 * kappa + 4.0) - kappa) / (2.0 + kappa);
}

LinearRate gd_pl_rate(double kappa, double alpha) {
  require_kappa_01(kappa, "gd_pl_rate");
  const double alpha_max = gd_pl_alpha_max(kappa);
  if (!std::isfinite(alpha) || alpha < 0.0 || alpha > alpha_max + 1e-12) {
    throw ParameterError("gd_pl_rate requires 0 <= alpha <= " + num(alpha_max) +
                         " at kappa=" + num(kappa) + ", got alpha=" + num(alpha));
  }
  LinearRate rate;
  rate.kappa = kappa;
  rate.alpha = alpha;
  rate.beta = kappa * alpha * alpha -
              (kappa * (2.0 - 2.0 * kappa) / (kappa + 2.0)) * alpha +
              (2.0 - 2.0 * kappa) / (2.0 + kappa);
  if (!(rate.beta < 1.0)) {
    throw InternalError("rate beta >= 1 inside the admissible region: beta=" +
                        num(rate.beta));
  }
  return rate;
}

OptimalBoost optimal_boost(double kappa) {
  require_kappa_01(kappa, "optimal_boost");
  OptimalBoost result;
  result.alpha_star = (1.0 - kappa) / (2.0 + kappa);
  result.rate = (4.0 - kappa * kappa * kappa - 3.0 * kappa) /
                ((2.0 + kappa) * (2.0 + kappa));
  result.step_length_times_L = 3.0 / (2.0 + kappa);
  return result;
}

double prior_step_length(double kappa, double L) {
  require_kappa_01(kappa, "prior_step_length");
  if (!std::isfinite(L) || L <= 0.0) {
    throw ParameterError("prior_step_length requires L > 0, got " + num(L));
  }
  return std::min(3.0 / (2.0 * L), 2.0 / ((1.0 + std::sqrt(kappa)) * L));
}

}  // namespace dcpep
