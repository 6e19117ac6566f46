#include "dcpep/gram_builder.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <utility>

#include "dcpep/errors.hpp"
#include "dcpep/sdp_backend.hpp"

namespace dcpep {

namespace {

Matrix sym_outer(const Vector& a, const Vector& b) {
  return 0.5 * (a * b.transpose() + b * a.transpose());
}

// Interpolation row for F_{mu,L}: Q(u, v) <= 0 expressed over (Gram, values).
Matrix interp_gram(const CurvatureClass& cls, const Vector& a, const Vector& b,
                   const Vector& gv) {
  const double c0 = 1.0 / (2.0 * (1.0 - cls.kappa()));
  Matrix gram = c0 * ((1.0 / cls.L) * (b * b.transpose()) +
                      cls.mu * (a * a.transpose()) -
                      (2.0 * cls.mu / cls.L) * sym_outer(b, a));
  gram += sym_outer(gv, a);
  return gram;
}

}  // namespace

const Vector& BasisMap::row(const std::string& name) const {
  const auto it = expansion.find(name);
  if (it == expansion.end()) {
    throw InternalError("basis expansion has no entry for " + name);
  }
  return it->second;
}

std::string grad_name(int func, const PointLabel& u) {
  return "g" + std::to_string(func) + "(" + u.name() + ")";
}

BasisMap assign_basis(const PEPProblem& problem) {
  const int N = problem.method.N;
  const double alpha = problem.method.alpha;
  const int dim = 4 * N + 2;

  BasisMap map;
  map.basis.reserve(dim);
  for (int k = 1; k <= N; ++k) map.basis.push_back(PointLabel::y(k).name());
  for (int k = 1; k <= N + 1; ++k) map.basis.push_back(grad_name(1, PointLabel::x(k)));
  for (int k = 1; k <= N; ++k) map.basis.push_back(grad_name(1, PointLabel::y(k)));
  for (int k = 1; k <= N; ++k) map.basis.push_back(grad_name(2, PointLabel::y(k)));
  map.basis.push_back(grad_name(2, PointLabel::x(N + 1)));

  const auto unit = [dim](int col) {
    Vector e = Vector::Zero(dim);
    e[col] = 1.0;
    return e;
  };

  map.expansion[PointLabel::x(1).name()] = Vector::Zero(dim);
  for (int k = 1; k <= N; ++k) {
    map.expansion[PointLabel::y(k).name()] = unit(k - 1);
  }
  for (int k = 1; k <= N; ++k) {
    const Vector& yk = map.expansion[PointLabel::y(k).name()];
    const Vector& xk = map.expansion[PointLabel::x(k).name()];
    map.expansion[PointLabel::x(k + 1).name()] = (1.0 + alpha) * yk - alpha * xk;
  }
  for (int k = 1; k <= N + 1; ++k) {
    map.expansion[grad_name(1, PointLabel::x(k))] = unit(N + k - 1);
  }
  for (int k = 1; k <= N; ++k) {
    const Vector shared = unit(2 * N + k);
    map.expansion[grad_name(1, PointLabel::y(k))] = shared;
    map.expansion[grad_name(2, PointLabel::x(k))] = shared;
  }
  for (int k = 1; k <= N; ++k) {
    map.expansion[grad_name(2, PointLabel::y(k))] = unit(3 * N + k);
  }
  map.expansion[grad_name(2, PointLabel::x(N + 1))] = unit(4 * N + 1);
  return map;
}

int value_index(int func, const PointLabel& u, int N) {
  if (func != 1 && func != 2) throw ParameterError("value index requires func in {1,2}");
  const int within = (u.kind == PointLabel::Kind::X) ? u.index - 1 : N + u.index;
  return (func - 1) * (2 * N + 1) + within;
}

SDPInstance emit_sdp(const PEPProblem& problem, const BasisMap& basis) {
  const int N = problem.method.N;
  SDPInstance inst;
  inst.gram_dim = basis.size();
  inst.value_dim = 2 * (2 * N + 1);

  const auto value_unit = [&](int func, const PointLabel& u, double coeff,
                              Vector& values) {
    values[value_index(func, u, N)] += coeff;
  };

  for (const ConstraintLabel& label : problem.constraints) {
    switch (label.kind) {
      case ConstraintLabel::Kind::GradLink:
      case ConstraintLabel::Kind::StepLink:
        inst.eliminated.push_back(label);
        continue;
      default:
        break;
    }

    SDPRow row;
    row.label = label;
    row.gram_coeff = Matrix::Zero(inst.gram_dim, inst.gram_dim);
    row.value_coeff = Vector::Zero(inst.value_dim);

    switch (label.kind) {
      case ConstraintLabel::Kind::Interp: {
        const CurvatureClass& cls =
            (label.func == 1) ? problem.class1 : problem.class2;
        const Vector a = basis.row(label.u.name()) - basis.row(label.v.name());
        const Vector b = basis.row(grad_name(label.func, label.u)) -
                         basis.row(grad_name(label.func, label.v));
        const Vector& gv = basis.row(grad_name(label.func, label.v));
        row.gram_coeff = interp_gram(cls, a, b, gv);
        value_unit(label.func, label.u, -1.0, row.value_coeff);
        value_unit(label.func, label.v, +1.0, row.value_coeff);
        break;
      }
      case ConstraintLabel::Kind::DescentLB: {
        const Vector d = basis.row(grad_name(1, label.u)) -
                         basis.row(grad_name(2, label.u));
        const double denom = 2.0 * (problem.class1.L - problem.class2.mu);
        row.gram_coeff = (1.0 / denom) * (d * d.transpose());
        value_unit(1, label.u, -1.0, row.value_coeff);
        value_unit(2, label.u, +1.0, row.value_coeff);
        break;
      }
      case ConstraintLabel::Kind::InitGap: {
        value_unit(1, PointLabel::x(1), +1.0, row.value_coeff);
        value_unit(2, PointLabel::x(1), -1.0, row.value_coeff);
        row.rhs = problem.delta;
        break;
      }
      case ConstraintLabel::Kind::PL: {
        const Vector d = basis.row(grad_name(1, label.u)) -
                         basis.row(grad_name(2, label.u));
        row.gram_coeff = (-1.0 / (2.0 * problem.pl_modulus.value())) *
                         (d * d.transpose());
        value_unit(1, label.u, +1.0, row.value_coeff);
        value_unit(2, label.u, -1.0, row.value_coeff);
        break;
      }
      case ConstraintLabel::Kind::ObjEpi: {
        const PointLabel xk = PointLabel::x(label.k);
        const Vector d = basis.row(grad_name(1, xk)) - basis.row(grad_name(2, xk));
        row.gram_coeff = -(d * d.transpose());
        row.epi_coeff = 1.0;
        break;
      }
      default:
        throw InternalError("unhandled constraint kind in emit_sdp");
    }
    inst.constraints.push_back(std::move(row));
  }
  return inst;
}

Certificate reconstruct_certificate(const PEPProblem& problem,
                                    const BasisMap& basis,
                                    const SolveResult& solve, double rank_tol) {
  if (solve.gram.rows() != basis.size() || solve.gram.cols() != basis.size()) {
    throw DimensionMismatch("certificate: gram size does not match basis");
  }
  if (!(rank_tol > 0.0)) throw ParameterError("certificate: rank_tol must be > 0");

  Eigen::SelfAdjointEigenSolver<Matrix> es(solve.gram);
  const Vector evals = es.eigenvalues();
  const double top = std::max(0.0, evals.maxCoeff());
  const double cut = rank_tol * top;
  if (evals.minCoeff() < -cut) {
    throw FactorizationError("certificate: gram block is not positive semidefinite");
  }

  std::vector<int> kept;
  for (int i = 0; i < evals.size(); ++i) {
    if (evals[i] > cut) kept.push_back(i);
  }
  const int r = static_cast<int>(kept.size());
  Matrix factor(r, basis.size());
  for (int i = 0; i < r; ++i) {
    factor.row(i) =
        std::sqrt(evals[kept[i]]) * es.eigenvectors().col(kept[i]).transpose();
  }

  Certificate cert;
  cert.dimension = r;
  const int N = problem.method.N;
  for (const PointLabel& u : problem.points) {
    for (int func : {1, 2}) {
      DiscreteTriple triple;
      triple.point = factor * basis.row(u.name());
      triple.grad = factor * basis.row(grad_name(func, u));
      triple.value = solve.values[value_index(func, u, N)];
      (func == 1 ? cert.triples1 : cert.triples2)[u] = std::move(triple);
    }
  }

  double worst = -std::numeric_limits<double>::infinity();
  for (int func : {1, 2}) {
    const auto& triples = (func == 1) ? cert.triples1 : cert.triples2;
    const CurvatureClass& cls = (func == 1) ? problem.class1 : problem.class2;
    for (const PointLabel& u : problem.points) {
      for (const PointLabel& v : problem.points) {
        if (u == v) continue;
        worst = std::max(
            worst, interpolation_residual(triples.at(u), triples.at(v), cls));
      }
    }
  }
  cert.max_residual = worst;
  return cert;
}

SDPInstance build_gd_pl_pep(double kappa, double alpha, double L, double delta) {
  if (!(kappa > 0.0) || kappa > 1.0) {
    throw ParameterError("gd-pl pep requires kappa in (0, 1]");
  }
  if (!(alpha >= 0.0) || alpha > 1.0) {
    throw ParameterError("gd-pl pep requires alpha in [0, 1]");
  }
  if (!(L > 0.0)) throw ParameterError("gd-pl pep requires L > 0");
  if (!(delta > 0.0)) throw ParameterError("gd-pl pep requires delta > 0");

  const double eta = kappa * L;
  const CurvatureClass cls2(0.0, 2.0 * L);
  const std::vector<PointLabel> points = {PointLabel::x(1), PointLabel::y(1),
                                          PointLabel::x(2)};

  // Basis {g2(x1), g2(y1), g2(x2)}; the points and the fixed component
  // f1 = (L/2)||.||^2 are expressed through it: x1 = 0, L y1 = g2(x1),
  // x2 = (1+alpha) y1, g1(u) = L u.
  const int dim = 3;
  std::map<std::string, Vector> point_row, g2_row;
  const auto unit = [dim](int col) {
    Vector e = Vector::Zero(dim);
    e[col] = 1.0;
    return e;
  };
  point_row["x1"] = Vector::Zero(dim);
  point_row["y1"] = (1.0 / L) * unit(0);
  point_row["x2"] = ((1.0 + alpha) / L) * unit(0);
  g2_row["x1"] = unit(0);
  g2_row["y1"] = unit(1);
  g2_row["x2"] = unit(2);

  const auto grad_f = [&](const PointLabel& u) {
    return Vector(L * point_row[u.name()] - g2_row[u.name()]);
  };
  // f1(u) as a Gram form.
  const auto f1_gram = [&](const PointLabel& u) {
    const Vector& p = point_row[u.name()];
    return Matrix(0.5 * L * (p * p.transpose()));
  };

  SDPInstance inst;
  inst.gram_dim = dim;
  inst.value_dim = 3;
  const auto f2_index = [&](const PointLabel& u) {
    if (u == PointLabel::x(1)) return 0;
    if (u == PointLabel::y(1)) return 1;
    return 2;
  };

  for (const PointLabel& u : points) {
    for (const PointLabel& v : points) {
      if (u == v) continue;
      SDPRow row;
      row.label = ConstraintLabel::interp(2, u, v);
      const Vector a = point_row[u.name()] - point_row[v.name()];
      const Vector b = g2_row[u.name()] - g2_row[v.name()];
      row.gram_coeff = interp_gram(cls2, a, b, g2_row[v.name()]);
      row.value_coeff = Vector::Zero(3);
      row.value_coeff[f2_index(u)] -= 1.0;
      row.value_coeff[f2_index(v)] += 1.0;
      inst.constraints.push_back(std::move(row));
    }
  }
  for (const PointLabel& u : points) {
    SDPRow row;
    row.label = ConstraintLabel::descent_lb(u);
    const Vector d = grad_f(u);
    row.gram_coeff = -f1_gram(u) + (1.0 / (2.0 * L)) * (d * d.transpose());
    row.value_coeff = Vector::Zero(3);
    row.value_coeff[f2_index(u)] = 1.0;
    inst.constraints.push_back(std::move(row));
  }
  for (const PointLabel& u : points) {
    SDPRow row;
    row.label = ConstraintLabel::pl(u);
    const Vector d = grad_f(u);
    row.gram_coeff = f1_gram(u) - (1.0 / (2.0 * eta)) * (d * d.transpose());
    row.value_coeff = Vector::Zero(3);
    row.value_coeff[f2_index(u)] = -1.0;
    inst.constraints.push_back(std::move(row));
  }
  {
    SDPRow row;
    row.label = ConstraintLabel::init_gap();
    row.gram_coeff = Matrix::Zero(3, 3);
    row.value_coeff = Vector::Zero(3);
    row.value_coeff[0] = -1.0;   // f(x1) = -f2(x1) since x1 = 0
    row.rhs = delta;
    inst.constraints.push_back(std::move(row));
  }
  {
    SDPRow row;
    row.label = ConstraintLabel::obj_epi(2);
    row.gram_coeff = -f1_gram(PointLabel::x(2));
    row.value_coeff = Vector::Zero(3);
    row.value_coeff[2] = 1.0;
    row.epi_coeff = 1.0;
    inst.constraints.push_back(std::move(row));
  }
  return inst;
}

}  // namespace dcpep
