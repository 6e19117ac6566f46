#pragma once

#include <Eigen/Core>
#include <compare>
#include <optional>
#include <string>
#include <vector>

#include "dcpep/errors.hpp"

namespace dcpep {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Function class F_{mu,L}: minimum curvature mu, maximum curvature L.
// Requires 0 <= mu < L < inf; mu = L is rejected because the interpolation
// denominator 1 - mu/L vanishes.
struct CurvatureClass {
  double mu = 0.0;
  double L = 1.0;

  CurvatureClass() = default;
  CurvatureClass(double mu_, double L_);

  double kappa() const { return mu / L; }
};

// N iterations of boosted DCA with extra step length alpha; alpha = 0 is
// plain DCA.
struct MethodConfig {
  int N = 1;
  double alpha = 0.0;

  MethodConfig() = default;
  MethodConfig(int N_, double alpha_);
};

// Label into the point set S = {x^1..x^{N+1}, y^1..y^N}; indices are 1-based.
struct PointLabel {
  enum class Kind { X, Y };
  Kind kind = Kind::X;
  int index = 1;

  static PointLabel x(int k) { return {Kind::X, k}; }
  static PointLabel y(int k) { return {Kind::Y, k}; }

  friend auto operator<=>(const PointLabel&, const PointLabel&) = default;

  std::string name() const;
};

// S in canonical order: x^1..x^{N+1}, then y^1..y^N.
std::vector<PointLabel> point_set(int N);

// Identifies one scalar constraint of the PEP.
//   Interp(func, u, v): interpolation row Q_func(u, v) <= 0, u != v
//   GradLink(k):        g1(y^k) = g2(x^k) (subproblem optimality)
//   StepLink(k):        x^{k+1} = y^k + alpha (y^k - x^k)
//   DescentLB(u):       descent-lemma lower bound on f* at u
//   InitGap:            f(x^1) - f* <= Delta
//   PL(u):              Polyak-Lojasiewicz row at u
//   ObjEpi(k):          epigraph row t <= ||g1(x^k) - g2(x^k)||^2
struct ConstraintLabel {
  enum class Kind { Interp, GradLink, StepLink, DescentLB, InitGap, PL, ObjEpi };

  Kind kind = Kind::InitGap;
  int func = 0;
  PointLabel u, v;
  int k = 0;

  static ConstraintLabel interp(int func, PointLabel u, PointLabel v);
  static ConstraintLabel grad_link(int k);
  static ConstraintLabel step_link(int k);
  static ConstraintLabel descent_lb(PointLabel u);
  static ConstraintLabel init_gap();
  static ConstraintLabel pl(PointLabel u);
  static ConstraintLabel obj_epi(int k);

  friend auto operator<=>(const ConstraintLabel&, const ConstraintLabel&) = default;

  std::string name() const;
};

PointLabel parse_point_label(const std::string& text);
ConstraintLabel parse_constraint_label(const std::string& text);

enum class PerformanceMeasure { MinGradDiffNormSq };

// Fully parameterized worst-case problem. f = f1 - f2 with f1 in class1 and
// f2 in class2; f* is normalized to 0. `constraints` lists every descriptor
// in deterministic order, including the equality links that the Gram lifting
// later eliminates.
struct PEPProblem {
  CurvatureClass class1, class2;
  MethodConfig method;
  double delta = 1.0;
  std::optional<double> pl_modulus;
  PerformanceMeasure measure = PerformanceMeasure::MinGradDiffNormSq;
  std::vector<PointLabel> points;
  std::vector<ConstraintLabel> constraints;
};

PEPProblem build_pep(const CurvatureClass& class1, const CurvatureClass& class2,
                     const MethodConfig& method, double delta,
                     std::optional<double> pl_modulus = std::nullopt);

// One (point, gradient, value) sample of a function.
struct DiscreteTriple {
  Vector point;
  Vector grad;
  double value = 0.0;
};

// Q(i,j) of the interpolation conditions; <= 0 for every ordered pair iff the
// sampled triples extend to a member of F_{mu,L}.
double interpolation_residual(const DiscreteTriple& i, const DiscreteTriple& j,
                              const CurvatureClass& cls);

// Descent-lemma upper bound on f*: f_value - grad_diff_norm_sq / (2(L1 - mu2)).
double descent_upper_bound(double f_value, double grad_diff_norm_sq, double L1,
                           double mu2);

// PL residual with f* = 0: f_value - grad_diff_norm_sq / (2 eta); <= 0 means
// the PL inequality holds at the sampled point.
double pl_residual(double f_value, double grad_diff_norm_sq, double eta);

}  // namespace dcpep
