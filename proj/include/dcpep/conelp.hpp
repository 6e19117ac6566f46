#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace dcpep::conelp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Cone layout for the slack rows of G: `nonneg` scalar rows first, then one
// svec-packed semidefinite block per entry of `psd`.
struct ConeDims {
  int nonneg = 0;
  std::vector<int> psd;

  int svec_total() const;
  int rows() const { return nonneg + svec_total(); }
  int order() const;
};

// Conic linear program in primal form
//   min c'x  s.t.  G x + s = h,  s in K,  A x = b
// where K is the cone described by dims. A and b may be empty.
struct Problem {
  VectorXd c;
  MatrixXd G;
  VectorXd h;
  ConeDims dims;
  MatrixXd A;
  VectorXd b;
};

enum class Status { Optimal, PrimalInfeasible, DualInfeasible, NumericalTrouble };

struct Options {
  double feastol = 1e-8;
  double abstol = 1e-8;
  double reltol = 1e-8;
  int max_iters = 100;
  double step_fraction = 0.99;
};

struct Result {
  Status status = Status::NumericalTrouble;
  VectorXd x, s, y, z;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double gap = 0.0;
  double primal_res = 0.0;
  double dual_res = 0.0;
  int iterations = 0;
  std::string message;
};

// Homogeneous self-dual embedding interior-point method with Nesterov-Todd
// scaling and a Mehrotra predictor-corrector step.
Result solve(const Problem& prob, const Options& opts = {});

// Symmetric packing: lower triangle in column-major order with off-diagonal
// entries scaled by sqrt(2), so svec(X) . svec(Y) = <X, Y>.
VectorXd svec(const MatrixXd& S);
MatrixXd smat(const VectorXd& v, int n);

// Matrix of the map svec(V) -> svec(W V W) for symmetric W.
MatrixXd sym_kron(const MatrixXd& W);

}  // namespace dcpep::conelp
