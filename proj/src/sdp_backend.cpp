#include "dcpep/sdp_backend.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dcpep/conelp.hpp"
#include "dcpep/errors.hpp"

namespace dcpep {

namespace {

int tri(int n) { return n * (n + 1) / 2; }

std::string fmt(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

void validate_instance(const SDPInstance& inst) {
  if (inst.gram_dim < 1) throw ParameterError("sdp instance: gram_dim must be >= 1");
  if (inst.value_dim < 0) throw ParameterError("sdp instance: negative value_dim");
  for (const SDPRow& row : inst.constraints) {
    if (row.gram_coeff.rows() != inst.gram_dim ||
        row.gram_coeff.cols() != inst.gram_dim) {
      throw DimensionMismatch("sdp instance: gram_coeff size mismatch in row " +
                              row.label.name());
    }
    if (row.value_coeff.size() != inst.value_dim) {
      throw DimensionMismatch("sdp instance: value_coeff size mismatch in row " +
                              row.label.name());
    }
    const double asym =
        (row.gram_coeff - row.gram_coeff.transpose()).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, row.gram_coeff.cwiseAbs().maxCoeff());
    if (asym > 1e-12 * scale) {
      throw ParameterError("sdp instance: gram_coeff not symmetric in row " +
                           row.label.name());
    }
  }
}

}  // namespace

SolveResult solve(const SDPInstance& instance, double tol) {
  if (!(tol > 0.0) || tol > 1e-2) {
    throw ParameterError("solver tolerance must lie in (0, 1e-2]");
  }
  validate_instance(instance);

  const int nv = instance.value_dim;
  const int sdim = tri(instance.gram_dim);
  const int n = nv + 1 + sdim;

  std::vector<const SDPRow*> le_rows, eq_rows;
  for (const SDPRow& row : instance.constraints) {
    (row.sense == Sense::LE ? le_rows : eq_rows).push_back(&row);
  }
  const int ml = static_cast<int>(le_rows.size());
  const int p = static_cast<int>(eq_rows.size());

  const auto encode = [&](const SDPRow& row) {
    Vector out(n);
    out.head(nv) = row.value_coeff;
    out[nv] = row.epi_coeff;
    out.tail(sdim) = conelp::svec(row.gram_coeff);
    return out;
  };

  conelp::Problem prob;
  prob.c = Vector::Zero(n);
  prob.c[nv] = -1.0;
  prob.G = Matrix::Zero(ml + sdim, n);
  prob.h = Vector::Zero(ml + sdim);
  for (int i = 0; i < ml; ++i) {
    prob.G.row(i) = encode(*le_rows[i]).transpose();
    prob.h[i] = le_rows[i]->rhs;
  }
  prob.G.block(ml, nv + 1, sdim, sdim) = -Matrix::Identity(sdim, sdim);
  prob.dims.nonneg = ml;
  prob.dims.psd = {instance.gram_dim};
  if (p > 0) {
    prob.A = Matrix::Zero(p, n);
    prob.b = Vector::Zero(p);
    for (int j = 0; j < p; ++j) {
      prob.A.row(j) = encode(*eq_rows[j]).transpose();
      prob.b[j] = eq_rows[j]->rhs;
    }
  }

  conelp::Options opts;
  opts.feastol = opts.abstol = opts.reltol = tol;
  opts.max_iters = 200;
  const conelp::Result res = conelp::solve(prob, opts);

  SolveResult out;
  out.iterations = res.iterations;
  const auto extract = [&](SolveStatus status) {
    out.status = status;
    out.values = res.x.head(nv);
    out.epi = res.x[nv];
    out.opt_value = out.epi;
    out.gram = conelp::smat(res.s.tail(sdim), instance.gram_dim);
    out.gap = res.gap;
    for (int i = 0; i < ml; ++i) out.duals[le_rows[i]->label] = res.z[i];
    for (int j = 0; j < p; ++j) out.duals[eq_rows[j]->label] = res.y[j];
    return out;
  };
  switch (res.status) {
    case conelp::Status::Optimal:
      return extract(SolveStatus::Optimal);
    case conelp::Status::PrimalInfeasible:
      out.status = SolveStatus::Infeasible;
      return out;
    case conelp::Status::DualInfeasible:
      out.status = SolveStatus::Unbounded;
      return out;
    case conelp::Status::NumericalTrouble:
      if (res.x.size() == 0) {
        throw SolverFailure("conic solve failed: " + res.message);
      }
      return extract(SolveStatus::NumericalTrouble);
  }
  throw InternalError("unreachable solver status");
}

void export_interchange(const SDPInstance& instance, std::ostream& out) {
  validate_instance(instance);
  const int nv = instance.value_dim;
  const int m = static_cast<int>(instance.constraints.size());
  int ml = 0;
  for (const SDPRow& row : instance.constraints) {
    if (row.sense == Sense::LE) ++ml;
  }
  const int diag = 2 * nv + 2 + ml;

  out << "\"dcpep sdp instance, dual encoding: block 1 gram, block 2 diagonal\n";
  out << "\"meta gram_dim=" << instance.gram_dim << " value_dim=" << nv
      << " rows=" << m << " le=" << ml << "\n";
  out << "\"eliminated";
  for (const ConstraintLabel& label : instance.eliminated) out << " " << label.name();
  out << "\n";
  for (int r = 0; r < m; ++r) {
    out << "\"row " << (r + 1) << ": " << instance.constraints[r].label.name()
        << " " << (instance.constraints[r].sense == Sense::LE ? "LE" : "EQ")
        << "\n";
  }

  out << m << "\n2\n" << instance.gram_dim << " -" << diag << "\n";
  for (int r = 0; r < m; ++r) {
    out << (r ? " " : "") << fmt(instance.constraints[r].rhs);
  }
  out << "\n";

  // Objective matrix F_0: maximize t = t+ - t-.
  out << "0 2 " << (2 * nv + 1) << " " << (2 * nv + 1) << " 1\n";
  out << "0 2 " << (2 * nv + 2) << " " << (2 * nv + 2) << " -1\n";

  int slack = 0;
  for (int r = 0; r < m; ++r) {
    const SDPRow& row = instance.constraints[r];
    const int k = r + 1;
    for (int i = 0; i < instance.gram_dim; ++i) {
      for (int j = i; j < instance.gram_dim; ++j) {
        const double v = row.gram_coeff(i, j);
        if (v != 0.0) {
          out << k << " 1 " << (i + 1) << " " << (j + 1) << " " << fmt(v) << "\n";
        }
      }
    }
    for (int j = 0; j < nv; ++j) {
      const double v = row.value_coeff[j];
      if (v != 0.0) {
        out << k << " 2 " << (2 * j + 1) << " " << (2 * j + 1) << " " << fmt(v)
            << "\n";
        out << k << " 2 " << (2 * j + 2) << " " << (2 * j + 2) << " " << fmt(-v)
            << "\n";
      }
    }
    if (row.epi_coeff != 0.0) {
      out << k << " 2 " << (2 * nv + 1) << " " << (2 * nv + 1) << " "
          << fmt(row.epi_coeff) << "\n";
      out << k << " 2 " << (2 * nv + 2) << " " << (2 * nv + 2) << " "
          << fmt(-row.epi_coeff) << "\n";
    }
    if (row.sense == Sense::LE) {
      ++slack;
      out << k << " 2 " << (2 * nv + 2 + slack) << " " << (2 * nv + 2 + slack)
          << " 1\n";
    }
  }
}

void export_interchange(const SDPInstance& instance, const std::string& path) {
  std::ofstream file(path);
  if (!file) throw IoError("cannot open for writing: " + path);
  export_interchange(instance, file);
  if (!file.good()) throw IoError("write failed: " + path);
}

SDPInstance import_interchange(std::istream& in) {
  SDPInstance inst;
  int rows = -1, le = -1;
  std::vector<ConstraintLabel> labels;
  std::vector<Sense> senses;
  std::string numeric;

  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '"' || line[0] == '*') {
      std::istringstream comment(line.substr(1));
      std::string head;
      comment >> head;
      if (head == "meta") {
        std::string token;
        while (comment >> token) {
          const auto eq = token.find('=');
          if (eq == std::string::npos) continue;
          const std::string key = token.substr(0, eq);
          const int value = std::stoi(token.substr(eq + 1));
          if (key == "gram_dim") inst.gram_dim = value;
          else if (key == "value_dim") inst.value_dim = value;
          else if (key == "rows") rows = value;
          else if (key == "le") le = value;
        }
      } else if (head == "eliminated") {
        std::string name;
        while (comment >> name) inst.eliminated.push_back(parse_constraint_label(name));
      } else if (head == "row") {
        std::string index, name, sense;
        comment >> index >> name >> sense;
        labels.push_back(parse_constraint_label(name));
        if (sense == "LE") senses.push_back(Sense::LE);
        else if (sense == "EQ") senses.push_back(Sense::EQ);
        else throw IoError("bad sense in row comment: " + line);
      }
      continue;
    }
    numeric += line;
    numeric += " ";
  }

  if (inst.gram_dim < 1 || inst.value_dim < 0 || rows < 0 || le < 0) {
    throw IoError("missing or malformed meta comment");
  }
  if (static_cast<int>(labels.size()) != rows) {
    throw IoError("row label comments do not match declared row count");
  }

  std::istringstream body(numeric);
  int m = 0, nblock = 0, bs1 = 0, bs2 = 0;
  if (!(body >> m >> nblock >> bs1 >> bs2)) throw IoError("truncated header");
  if (m != rows || nblock != 2 || bs1 != inst.gram_dim ||
      bs2 != -(2 * inst.value_dim + 2 + le)) {
    throw IoError("block structure disagrees with meta comment");
  }

  inst.constraints.resize(rows);
  for (int r = 0; r < rows; ++r) {
    SDPRow& row = inst.constraints[r];
    row.label = labels[r];
    row.sense = senses[r];
    row.gram_coeff = Matrix::Zero(inst.gram_dim, inst.gram_dim);
    row.value_coeff = Vector::Zero(inst.value_dim);
    if (!(body >> row.rhs)) throw IoError("truncated objective vector");
  }

  const int nv = inst.value_dim;
  int k = 0, blk = 0, i = 0, j = 0;
  double v = 0.0;
  while (body >> k >> blk >> i >> j >> v) {
    if (k < 0 || k > rows) throw IoError("entry references row out of range");
    if (k == 0) continue;
    SDPRow& row = inst.constraints[k - 1];
    if (blk == 1) {
      if (i < 1 || j < 1 || i > inst.gram_dim || j > inst.gram_dim) {
        throw IoError("gram entry out of range");
      }
      row.gram_coeff(i - 1, j - 1) = v;
      row.gram_coeff(j - 1, i - 1) = v;
    } else if (blk == 2) {
      if (i != j) throw IoError("diagonal block entry must have i == j");
      if (i <= 2 * nv) {
        if (i % 2 == 1) row.value_coeff[(i - 1) / 2] = v;
      } else if (i == 2 * nv + 1) {
        row.epi_coeff = v;
      }
      // i == 2nv+2 mirrors the epigraph pair; larger i are slack markers.
    } else {
      throw IoError("unknown block index");
    }
  }
  return inst;
}

SDPInstance import_interchange(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot open for reading: " + path);
  return import_interchange(file);
}

double check_solution(const SDPInstance& instance, const SolveResult& result) {
  validate_instance(instance);
  double worst = 0.0;
  for (const SDPRow& row : instance.constraints) {
    double lhs = row.epi_coeff * result.epi;
    if (result.values.size() > 0) lhs += row.value_coeff.dot(result.values);
    if (result.gram.size() > 0) {
      lhs += (row.gram_coeff.cwiseProduct(result.gram)).sum();
    }
    const double gap = lhs - row.rhs;
    worst = std::max(worst, row.sense == Sense::LE ? gap : std::abs(gap));
  }
  if (result.gram.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(result.gram, Eigen::EigenvaluesOnly);
    worst = std::max(worst, -es.eigenvalues().minCoeff());
  }
  return worst;
}

}  // namespace dcpep
