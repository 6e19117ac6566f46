#include "dcpep/proof_certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "dcpep/bounds.hpp"

namespace dcpep {

namespace {

std::string num(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

void require_alpha_01(double alpha, const char* who) {
  if (!std::isfinite(alpha) || alpha <= 0.0 || alpha > 1.0) {
    throw ParameterError(std::string(who) + " requires alpha in (0,1], got " +
                         num(alpha) +
                         (alpha == 0.0 ? " (the table contains 1/alpha)" : ""));
  }
}

struct IdentityEval {
  double residual = 0.0;
  double scale = 1.0;
};

IdentityEval eval_one_iteration(const OneIterSample& s) {
  const CurvatureClass cls(s.mu, s.L);
  const auto n = static_cast<Eigen::Index>(s.dim);
  for (const Vector* v : {&s.x_k, &s.y_k, &s.g1_xk, &s.g1_xk1, &s.g2_yk,
                          &s.g2_xk1, &s.shared}) {
    if (v->size() != n) {
      throw DimensionMismatch("sample vectors must all have length dim = " +
                              std::to_string(s.dim));
    }
  }
  const MultiplierTable lam = one_iter_multipliers(s.mu, s.L, s.alpha);
  const SosCoefficients c = sos_coefficients(s.mu, s.L, s.alpha);

  const Vector x_k1 = s.x_k1();
  const DiscreteTriple f1_xk{s.x_k, s.g1_xk, s.f1_xk};
  const DiscreteTriple f1_yk{s.y_k, s.shared, s.f1_yk};
  const DiscreteTriple f1_xk1{x_k1, s.g1_xk1, s.f1_xk1};
  const DiscreteTriple f2_xk{s.x_k, s.shared, s.f2_xk};
  const DiscreteTriple f2_xk1{x_k1, s.g2_xk1, s.f2_xk1};

  const double lhs_terms[5] = {
      lam.lam_1_xk_yk * interpolation_residual(f1_xk, f1_yk, cls),
      lam.lam_1_yk_xk * interpolation_residual(f1_yk, f1_xk, cls),
      lam.lam_1_xk1_yk * interpolation_residual(f1_xk1, f1_yk, cls),
      lam.lam_1_yk_xk1 * interpolation_residual(f1_yk, f1_xk1, cls),
      lam.lam_2_xk1_xk * interpolation_residual(f2_xk1, f2_xk, cls),
  };

  const Vector diff = s.x_k - s.y_k;
  const Vector v1 = (s.alpha * s.mu - 2.0 * (s.alpha - 1.0) * s.L) * s.g1_xk1 +
                    s.L * (s.alpha - 2.0) * s.shared +
                    s.alpha * (s.L - s.mu) * s.g2_xk1 +
                    s.alpha * s.L * (-s.alpha * s.mu + s.mu + s.L) * diff;
  const Vector v2 = -s.shared + s.g2_xk1 + (s.L + s.alpha * s.mu) * diff;
  const Vector v3 = s.g1_xk - s.shared - s.L * diff;

  const double rhs_terms[9] = {
      s.f1_xk1,
      -s.f2_xk1,
      -s.f1_xk,
      s.f2_xk,
      (s.g1_xk1 - s.g2_xk1).squaredNorm() / (2.0 * s.L),
      (0.5 + s.alpha * s.mu / s.L) * (s.g1_xk - s.shared).squaredNorm() / s.L,
      c.c1 * v1.squaredNorm(),
      c.c2 * v2.squaredNorm(),
      c.c3 * v3.squaredNorm(),
  };

  IdentityEval eval;
  double lhs = 0.0, rhs = 0.0, largest = 0.0;
  for (double t : lhs_terms) {
    lhs += t;
    largest = std::max(largest, std::abs(t));
  }
  for (double t : rhs_terms) {
    rhs += t;
    largest = std::max(largest, std::abs(t));
  }
  eval.residual = std::abs(lhs - rhs);
  eval.scale = 1.0 + largest;
  return eval;
}

struct GdPlEval {
  double residual = 0.0;
  double scale = 1.0;
  double min_multiplier = 0.0;
};

GdPlEval eval_gd_pl(double alpha, double L, double eta, const Vector& g2_x1,
                    const Vector& g2_y1, const Vector& g2_x2, double f2_x1,
                    double f2_y1, double f2_x2) {
  if (!std::isfinite(L) || L <= 0.0) {
    throw ParameterError("gd-pl identity requires L > 0, got " + num(L));
  }
  if (!std::isfinite(eta) || eta <= 0.0 || eta > L) {
    throw ParameterError("gd-pl identity requires eta in (0, L], got eta=" +
                         num(eta) + " at L=" + num(L));
  }
  if (g2_y1.size() != g2_x1.size() || g2_x2.size() != g2_x1.size()) {
    throw DimensionMismatch("gd-pl gradients must share one dimension");
  }
  const double kappa = eta / L;
  const double beta = gd_pl_rate(kappa, alpha).beta;

  const double m_ib = alpha;
  const double m_ii = ((2.0 - kappa) * alpha + 2.0) / (kappa + 2.0);
  const double m_iv = -kappa * alpha * alpha -
                      (2.0 * kappa * kappa / (kappa + 2.0)) * alpha +
                      2.0 * kappa / (kappa + 2.0);
  const double m_v = kappa * (2.0 * alpha + 1.0) / (kappa + 2.0);

  const double cross_x1_y1 = (g2_x1 - g2_y1).squaredNorm() / (4.0 * L);
  const double lines[6] = {
      0.5 * L * ((1.0 + alpha) / L * g2_x1).squaredNorm() - f2_x2 -
          beta * (-f2_x1),
      m_ib * (f2_x1 - f2_y1 + g2_y1.dot(g2_x1) / L - cross_x1_y1),
      m_ii * (f2_y1 - f2_x1 - g2_x1.squaredNorm() / L - cross_x1_y1),
      f2_x2 - f2_y1 - (alpha / L) * g2_y1.dot(g2_x1) -
          (g2_x2 - g2_y1).squaredNorm() / (4.0 * L),
      m_iv * (g2_x1.squaredNorm() / (2.0 * eta) + f2_x1),
      m_v * ((g2_x1 - g2_y1).squaredNorm() / (2.0 * eta) -
             g2_x1.squaredNorm() / (2.0 * L) + f2_y1),
  };

  GdPlEval eval;
  double sum = 0.0, largest = 0.0;
  for (double t : lines) {
    sum += t;
    largest = std::max(largest, std::abs(t));
  }
  const double closing = -(g2_x2 - g2_y1).squaredNorm() / (4.0 * L);
  eval.residual = std::abs(sum - closing);
  eval.scale = 1.0 + std::max(largest, std::abs(closing));
  eval.min_multiplier = std::min({m_ib, m_ii, m_iv, m_v});
  return eval;
}

}  // namespace

MultiplierTable one_iter_multipliers(double mu, double L, double alpha) {
  const CurvatureClass cls(mu, L);
  require_alpha_01(alpha, "one_iter_multipliers");
  MultiplierTable table;
  table.lam_1_xk_yk = 1.0 + 2.0 * alpha * cls.kappa();
  table.lam_1_yk_xk = 2.0 * alpha * cls.kappa();
  table.lam_1_xk1_yk = 1.0 / alpha - 1.0;
  table.lam_1_yk_xk1 = 1.0 / alpha;
  table.lam_2_xk1_xk = 1.0;
  return table;
}

SosCoefficients sos_coefficients(double mu, double L, double alpha) {
  CurvatureClass{mu, L};
  require_alpha_01(alpha, "sos_coefficients");
  const double d1 = 2.0 * alpha * L * (L - mu) * (alpha * mu + 2.0 * (1.0 - alpha) * L);
  const double d2 = 2.0 * (L - mu) * (2.0 * L * (alpha - 1.0) - alpha * mu);
  const double d3 = 2.0 * L * L * (L - mu);
  if (d1 == 0.0 || d2 == 0.0 || d3 == 0.0) {
    throw DegenerateError("sum-of-squares coefficient denominator vanishes at mu=" +
                          num(mu) + ", L=" + num(L) + ", alpha=" + num(alpha));
  }
  SosCoefficients c;
  c.c1 = 1.0 / d1;
  c.c2 = (alpha * L - 2.0 * mu) / d2;
  c.c3 = mu * (L + 2.0 * alpha * L + 2.0 * alpha * mu) / d3;
  return c;
}

double verify_one_iteration_identity(const OneIterSample& sample) {
  return eval_one_iteration(sample).residual;
}

ChainSlacks verify_descent_chain(const TrajectoryReport& trajectory, double mu,
                                 double L, double alpha) {
  const CurvatureClass cls(mu, L);
  if (trajectory.class1.mu != mu || trajectory.class1.L != L ||
      trajectory.class2.mu != mu || trajectory.class2.L != L) {
    throw ClassMismatch("trajectory was run with classes (" +
                        num(trajectory.class1.mu) + "," + num(trajectory.class1.L) +
                        ") and (" + num(trajectory.class2.mu) + "," +
                        num(trajectory.class2.L) + "), not F_{" + num(mu) + "," +
                        num(L) + "} twice");
  }
  const double alpha_max = std::min(1.0, 2.0 * cls.kappa());
  if (!std::isfinite(alpha) || alpha <= 0.0 || alpha > alpha_max) {
    throw ParameterError("descent chain requires 0 < alpha <= min{1, 2 mu/L} = " +
                         num(alpha_max) + ", got " + num(alpha));
  }
  if (trajectory.alpha != alpha) {
    throw ParameterError("trajectory was run with alpha = " +
                         num(trajectory.alpha) + ", asked to certify " +
                         num(alpha));
  }
  const int N = trajectory.N;
  if (static_cast<int>(trajectory.x.size()) != N + 1 ||
      static_cast<int>(trajectory.f_x.size()) != N + 1 ||
      static_cast<int>(trajectory.g1_x.size()) != N + 1 ||
      static_cast<int>(trajectory.g2_x.size()) != N + 1) {
    throw DimensionMismatch("trajectory arrays do not cover x^1..x^{N+1}");
  }

  std::vector<double> dsq(N + 1);
  for (int k = 0; k <= N; ++k) {
    dsq[k] = (trajectory.g1_x[k] - trajectory.g2_x[k]).squaredNorm();
  }

  ChainSlacks slacks;
  slacks.per_step.resize(N);
  const double w_prev = (0.5 + alpha * mu / L) / L;
  for (int k = 0; k < N; ++k) {
    slacks.per_step[k] = trajectory.f_x[k] - trajectory.f_x[k + 1] -
                         dsq[k + 1] / (2.0 * L) - w_prev * dsq[k];
  }

  double lhs = (0.5 + alpha * mu / L) * dsq[0];
  for (int i = 1; i < N; ++i) lhs += (1.0 + alpha * mu / L) * dsq[i];
  lhs += (1.0 - mu / (2.0 * L)) / (1.0 - mu / L) * dsq[N];
  const double rhs = L * (trajectory.f_x[0] - trajectory.f_x[N] +
                          dsq[N] / (2.0 * (L - mu)));
  slacks.final = rhs - lhs;
  return slacks;
}

double verify_gd_pl_identity(double alpha, double L, double eta,
                             const Vector& g2_x1, const Vector& g2_y1,
                             const Vector& g2_x2, double f2_x1, double f2_y1,
                             double f2_x2) {
  return eval_gd_pl(alpha, L, eta, g2_x1, g2_y1, g2_x2, f2_x1, f2_y1, f2_x2)
      .residual;
}

std::map<ConstraintLabel, double> extract_dual_multipliers(
    const SolveResult& result) {
  std::map<ConstraintLabel, double> picked;
  for (const auto& [label, value] : result.duals) {
    if (std::abs(value) > 1e-9) picked.emplace(label, value);
  }
  return picked;
}

IdentitySweep one_iteration_identity_sweep(int samples, int max_dim,
                                           std::uint64_t seed) {
  if (samples < 1) throw ParameterError("sweep needs samples >= 1");
  if (max_dim < 1) throw ParameterError("sweep needs max_dim >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> dims(1, max_dim);

  IdentitySweep sweep;
  sweep.samples = samples;
  sweep.min_multiplier = std::numeric_limits<double>::infinity();
  sweep.min_coefficient = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    OneIterSample s;
    s.dim = dims(rng);
    s.L = std::pow(10.0, 2.0 * unit(rng) - 1.0);
    const double kappa = 0.0005 + 0.999 * unit(rng);
    s.mu = kappa * s.L;
    s.alpha = std::min(1.0, 2.0 * kappa) * (1.0 - unit(rng));
    const auto randn = [&] {
      Vector v(s.dim);
      for (int j = 0; j < s.dim; ++j) v[j] = gauss(rng);
      return v;
    };
    s.x_k = randn();
    s.y_k = randn();
    s.g1_xk = randn();
    s.g1_xk1 = randn();
    s.g2_yk = randn();
    s.g2_xk1 = randn();
    s.shared = randn();
    s.f1_xk = gauss(rng);
    s.f1_yk = gauss(rng);
    s.f1_xk1 = gauss(rng);
    s.f2_xk = gauss(rng);
    s.f2_xk1 = gauss(rng);

    const IdentityEval eval = eval_one_iteration(s);
    sweep.max_residual = std::max(sweep.max_residual, eval.residual / eval.scale);
    const MultiplierTable lam = one_iter_multipliers(s.mu, s.L, s.alpha);
    sweep.min_multiplier = std::min({sweep.min_multiplier, lam.lam_1_xk_yk,
                                     lam.lam_1_yk_xk, lam.lam_1_xk1_yk,
                                     lam.lam_1_yk_xk1, lam.lam_2_xk1_xk});
    const SosCoefficients c = sos_coefficients(s.mu, s.L, s.alpha);
    sweep.min_coefficient = std::min({sweep.min_coefficient, c.c1, c.c2, c.c3});
  }
  return sweep;
}

IdentitySweep gd_pl_identity_sweep(int samples, int max_dim, std::uint64_t seed) {
  if (samples < 1) throw ParameterError("sweep needs samples >= 1");
  if (max_dim < 1) throw ParameterError("sweep needs max_dim >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> dims(1, max_dim);

  IdentitySweep sweep;
  sweep.samples = samples;
  sweep.min_multiplier = std::numeric_limits<double>::infinity();
  sweep.min_coefficient = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const int dim = dims(rng);
    const double L = std::pow(10.0, 2.0 * unit(rng) - 1.0);
    const double kappa = 1.0 - 0.9995 * unit(rng);
    const double eta = kappa * L;
    const double alpha = gd_pl_alpha_max(kappa) * unit(rng);
    const auto randn = [&] {
      Vector v(dim);
      for (int j = 0; j < dim; ++j) v[j] = gauss(rng);
      return v;
    };
    const Vector g2_x1 = randn(), g2_y1 = randn(), g2_x2 = randn();
    const GdPlEval eval = eval_gd_pl(alpha, L, eta, g2_x1, g2_y1, g2_x2,
                                     gauss(rng), gauss(rng), gauss(rng));
    sweep.max_residual = std::max(sweep.max_residual, eval.residual / eval.scale);
    sweep.min_multiplier = std::min(sweep.min_multiplier, eval.min_multiplier);
    sweep.min_coefficient = std::min(sweep.min_coefficient, 1.0 / (4.0 * L));
  }
  return sweep;
}

ChainSweep descent_chain_sweep(int trials, int dim, std::uint64_t seed) {
  if (trials < 1) throw ParameterError("sweep needs trials >= 1");
  if (dim < 1) throw ParameterError("sweep needs dim >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> horizon(1, 5);
  const CurvatureClass cls(0.5, 1.0);

  ChainSweep sweep;
  sweep.trials = trials;
  sweep.min_per_step = std::numeric_limits<double>::infinity();
  sweep.min_final = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    const QuadraticDC q = random_quadratic_dc(dim, cls, cls, rng());
    const double alpha = 1.0 - unit(rng);
    const int N = horizon(rng);
    Vector x1(dim);
    for (int j = 0; j < dim; ++j) x1[j] = gauss(rng);
    const TrajectoryReport run = run_bdca(q.instance(), x1, N, alpha);
    const ChainSlacks slacks = verify_descent_chain(run, cls.mu, cls.L, alpha);
    double sum = 0.0;
    for (double s : slacks.per_step) {
      sweep.min_per_step = std::min(sweep.min_per_step, s);
      sum += s;
    }
    sweep.min_final = std::min(sweep.min_final, slacks.final);
    const double gap = std::abs(slacks.final - cls.L * sum) /
                       (1.0 + std::abs(slacks.final));
    sweep.max_link_gap = std::max(sweep.max_link_gap, gap);
  }
  return sweep;
}

}  // namespace dcpep
