#pragma once

#include <map>
#include <string>
#include <vector>

#include "dcpep/pep_model.hpp"

namespace dcpep {

struct SolveResult;

// Expansion of every symbolic vector of the PEP over an independent basis.
// Keys are PointLabel names ("x1", "y2") and gradient names ("g1(x1)");
// g1(y^k) and g2(x^k) share one key each but resolve to the same row.
struct BasisMap {
  std::vector<std::string> basis;
  std::map<std::string, Vector> expansion;

  const Vector& row(const std::string& name) const;
  int size() const { return static_cast<int>(basis.size()); }
};

std::string grad_name(int func, const PointLabel& u);

// Basis order: y^1..y^N, g1(x^1)..g1(x^{N+1}), g1(y^1)..g1(y^N) (shared with
// g2(x^k)), g2(y^1)..g2(y^N), g2(x^{N+1}); size 4N+2. x^1 expands to zero and
// every x^{k+1} to (1+alpha) y^k - alpha x^k.
BasisMap assign_basis(const PEPProblem& problem);

enum class Sense { LE, EQ };

struct SDPRow {
  ConstraintLabel label;
  Matrix gram_coeff;
  Vector value_coeff;
  double epi_coeff = 0.0;
  double rhs = 0.0;
  Sense sense = Sense::LE;
};

// Standard form: maximize the epigraph scalar t over (Gram >= 0, values, t)
// subject to the rows below. Function values are indexed f1 block then f2
// block, points in x^1..x^{N+1}, y^1..y^N order within each block.
struct SDPInstance {
  int gram_dim = 0;
  int value_dim = 0;
  std::vector<SDPRow> constraints;
  std::vector<ConstraintLabel> eliminated;
};

int value_index(int func, const PointLabel& u, int N);

SDPInstance emit_sdp(const PEPProblem& problem, const BasisMap& basis);

// Concrete points, gradients, and values recovered from a Gram factorization.
struct Certificate {
  int dimension = 0;
  std::map<PointLabel, DiscreteTriple> triples1, triples2;
  double max_residual = 0.0;
};

Certificate reconstruct_certificate(const PEPProblem& problem,
                                    const BasisMap& basis,
                                    const SolveResult& solve,
                                    double rank_tol = 1e-7);

// One-step PEP for gradient descent with a boost step on f = (L/2)||.||^2 -
// f2, f2 in F_{0,2L}, under the PL condition with modulus eta = kappa L.
// Measures f(x^2) subject to f(x^1) <= delta with f* = 0; basis is
// {g2(x^1), g2(y^1), g2(x^2)}.
SDPInstance build_gd_pl_pep(double kappa, double alpha, double L, double delta);

}  // namespace dcpep
