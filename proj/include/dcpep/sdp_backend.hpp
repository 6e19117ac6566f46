#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "dcpep/gram_builder.hpp"

namespace dcpep {

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalTrouble };

struct SolveResult {
  SolveStatus status = SolveStatus::NumericalTrouble;
  double opt_value = 0.0;
  Matrix gram;
  Vector values;
  double epi = 0.0;
  std::map<ConstraintLabel, double> duals;
  double gap = 0.0;
  int iterations = 0;
};

// Solves the instance with the embedded conic interior-point method. Optimal
// means primal feasibility residuals <= tol and gap <= tol (1 + |opt_value|).
// Infeasible and Unbounded are reported as statuses. NumericalTrouble carries
// the most balanced iterate reached before progress stopped, with gap set to
// what that iterate achieved; SolverFailure is thrown only when the backend
// produced no usable iterate at all.
SolveResult solve(const SDPInstance& instance, double tol = 1e-8);

// SDPA sparse format (".dat-s"), dual encoding: block 1 is the Gram matrix,
// block 2 a diagonal block holding the function values and t as differences
// of nonnegative pairs plus one slack per inequality row. Comment lines carry
// the constraint labels in row order.
void export_interchange(const SDPInstance& instance, std::ostream& out);
void export_interchange(const SDPInstance& instance, const std::string& path);
SDPInstance import_interchange(std::istream& in);
SDPInstance import_interchange(const std::string& path);

// Worst violation over all rows plus the negative part of the Gram spectrum.
double check_solution(const SDPInstance& instance, const SolveResult& result);

}  // namespace dcpep
