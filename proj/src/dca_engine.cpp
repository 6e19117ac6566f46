#include "dcpep/dca_engine.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
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

// Fermat tolerance for subproblem solutions, relative to the linearization.
constexpr double kFermatTol = 1e-8;

void require_symmetric(const Matrix& A, const char* name) {
  const double scale = 1.0 + A.cwiseAbs().maxCoeff();
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ParameterError(std::string(name) + " must be symmetric");
  }
}

void require_spectrum(const Matrix& A, const CurvatureClass& cls,
                      const char* name) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(A, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  const double tol = 1e-9 * (1.0 + cls.L);
  if (lo < cls.mu - tol || hi > cls.L + tol) {
    throw ClassMismatch(std::string(name) + " has eigenvalues in [" + num(lo) +
                        ", " + num(hi) + "], outside the declared class [" +
                        num(cls.mu) + ", " + num(cls.L) + "]");
  }
}

double min_eigenvalue(const Matrix& A) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(A, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

}  // namespace

QuadraticDC::QuadraticDC(Matrix A1_, Vector b1_, double c1_,
                         const CurvatureClass& cls1, Matrix A2_, Vector b2_,
                         double c2_, const CurvatureClass& cls2)
    : A1(std::move(A1_)),
      A2(std::move(A2_)),
      b1(std::move(b1_)),
      b2(std::move(b2_)),
      c1(c1_),
      c2(c2_),
      class1(cls1),
      class2(cls2) {
  const auto n = b1.size();
  if (n < 1) throw DimensionMismatch("quadratic pair needs dimension >= 1");
  if (A1.rows() != n || A1.cols() != n || A2.rows() != n || A2.cols() != n ||
      b2.size() != n) {
    throw DimensionMismatch("quadratic pair has inconsistent dimensions");
  }
  require_symmetric(A1, "A1");
  require_symmetric(A2, "A2");
  require_spectrum(A1, class1, "A1");
  require_spectrum(A2, class2, "A2");
  if (!(min_eigenvalue(A1) > 0.0)) {
    throw ParameterError("A1 must be positive definite");
  }
}

DCInstance QuadraticDC::instance() const {
  auto q = std::make_shared<const QuadraticDC>(*this);
  auto llt = std::make_shared<const Eigen::LLT<Matrix>>(q->A1);
  if (llt->info() != Eigen::Success) {
    throw FactorizationError("A1 factorization failed despite the spectrum check");
  }
  DCInstance inst;
  inst.dim = dim();
  inst.f1_value = [q](const Vector& x) {
    return 0.5 * x.dot(q->A1 * x) + q->b1.dot(x) + q->c1;
  };
  inst.f2_value = [q](const Vector& x) {
    return 0.5 * x.dot(q->A2 * x) + q->b2.dot(x) + q->c2;
  };
  inst.f1_subgrad = [q](const Vector& x) { return Vector(q->A1 * x + q->b1); };
  inst.f2_subgrad = [q](const Vector& x) { return Vector(q->A2 * x + q->b2); };
  inst.solve_linearized = [q, llt](const Vector& g) {
    return Vector(llt->solve(g - q->b1));
  };
  inst.class1 = class1;
  inst.class2 = class2;
  return inst;
}

QuadraticDC random_quadratic_dc(int dim, const CurvatureClass& class1,
                                const CurvatureClass& class2, std::uint64_t seed,
                                std::optional<SpectrumRange> spectrum1,
                                std::optional<SpectrumRange> spectrum2) {
  if (dim < 1) throw ParameterError("random instance needs dim >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const auto draw = [&](const CurvatureClass& cls,
                        const std::optional<SpectrumRange>& range,
                        double floor) {
    double lo = std::max(cls.mu, floor);
    double hi = cls.L;
    if (range) {
      lo = range->lo;
      hi = range->hi;
    }
    if (!(lo >= cls.mu && hi <= cls.L && lo <= hi)) {
      throw ParameterError("spectrum range [" + num(lo) + ", " + num(hi) +
                           "] leaves the class [" + num(cls.mu) + ", " +
                           num(cls.L) + "]");
    }
    Matrix G(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) G(i, j) = gauss(rng);
    const Matrix Q = Eigen::HouseholderQR<Matrix>(G).householderQ();
    std::uniform_real_distribution<double> eig(lo, hi);
    Vector lam(dim);
    for (int i = 0; i < dim; ++i) lam[i] = eig(rng);
    Matrix A = Q * lam.asDiagonal() * Q.transpose();
    A = 0.5 * (A + A.transpose()).eval();
    return A;
  };
  const Matrix A1 = draw(class1, spectrum1, 0.05 * class1.L);
  const Matrix A2 = draw(class2, spectrum2, class2.mu);
  Vector b1(dim), b2(dim);
  for (int i = 0; i < dim; ++i) {
    b1[i] = gauss(rng);
    b2[i] = gauss(rng);
  }
  return QuadraticDC(A1, b1, gauss(rng), class1, A2, b2, gauss(rng), class2);
}

double dc_minimum(const QuadraticDC& q) {
  const Matrix A = q.A1 - q.A2;
  if (!(min_eigenvalue(A) > 0.0)) {
    throw DegenerateError("f1 - f2 is not strongly convex; no attained minimum");
  }
  const Vector xstar = Eigen::LLT<Matrix>(A).solve(-(q.b1 - q.b2));
  return 0.5 * xstar.dot(A * xstar) + (q.b1 - q.b2).dot(xstar) + (q.c1 - q.c2);
}

QuadraticDC load_quadratic_dc(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "quadratic-dc" || version != 1) {
    throw IoError("instance file must start with 'quadratic-dc 1'");
  }
  const auto read_keyword = [&](const char* expect) {
    std::string word;
    if (!(in >> word) || word != expect) {
      throw IoError(std::string("expected keyword '") + expect + "'" +
                    (word.empty() ? "" : ", got '" + word + "'"));
    }
  };
  const auto read_double = [&](const char* what) {
    double v = 0.0;
    if (!(in >> v)) throw IoError(std::string("malformed number in ") + what);
    return v;
  };
  read_keyword("dim");
  int n = 0;
  if (!(in >> n) || n < 1) throw IoError("malformed dimension");
  read_keyword("class1");
  const double mu1 = read_double("class1");
  const double L1 = read_double("class1");
  read_keyword("class2");
  const double mu2 = read_double("class2");
  const double L2 = read_double("class2");
  const auto read_matrix = [&](const char* name) {
    read_keyword(name);
    Matrix A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = read_double(name);
    return A;
  };
  const auto read_vector = [&](const char* name) {
    read_keyword(name);
    Vector b(n);
    for (int i = 0; i < n; ++i) b[i] = read_double(name);
    return b;
  };
  const Matrix A1 = read_matrix("A1");
  const Vector b1 = read_vector("b1");
  read_keyword("c1");
  const double c1 = read_double("c1");
  const Matrix A2 = read_matrix("A2");
  const Vector b2 = read_vector("b2");
  read_keyword("c2");
  const double c2 = read_double("c2");
  try {
    return QuadraticDC(A1, b1, c1, CurvatureClass(mu1, L1), A2, b2, c2,
                       CurvatureClass(mu2, L2));
  } catch (const Error& e) {
    throw IoError(std::string("instance file rejected: ") + e.what());
  }
}

QuadraticDC load_quadratic_dc(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open instance file: " + path);
  return load_quadratic_dc(in);
}

void save_quadratic_dc(const QuadraticDC& q, std::ostream& out) {
  const int n = q.dim();
  out << std::setprecision(17);
  out << "quadratic-dc 1\n";
  out << "dim " << n << "\n";
  out << "class1 " << q.class1.mu << " " << q.class1.L << "\n";
  out << "class2 " << q.class2.mu << " " << q.class2.L << "\n";
  const auto write_matrix = [&](const char* name, const Matrix& A) {
    out << name << "\n";
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) out << (j ? " " : "") << A(i, j);
      out << "\n";
    }
  };
  const auto write_vector = [&](const char* name, const Vector& b) {
    out << name << "\n";
    for (int i = 0; i < n; ++i) out << (i ? " " : "") << b[i];
    out << "\n";
  };
  write_matrix("A1", q.A1);
  write_vector("b1", q.b1);
  out << "c1 " << q.c1 << "\n";
  write_matrix("A2", q.A2);
  write_vector("b2", q.b2);
  out << "c2 " << q.c2 << "\n";
  if (!out) throw IoError("instance write failed");
}

void save_quadratic_dc(const QuadraticDC& q, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open instance file for writing: " + path);
  save_quadratic_dc(q, out);
}

TrajectoryReport run_bdca(const DCInstance& instance, const Vector& x1, int N,
                          double alpha) {
  if (N < 1) throw ParameterError("run needs N >= 1");
  if (!std::isfinite(alpha) || alpha < 0.0 || alpha > 1.0) {
    throw ParameterError("run needs alpha in [0,1], got " + num(alpha));
  }
  if (instance.dim != 0 && x1.size() != instance.dim) {
    throw DimensionMismatch("x1 has size " + std::to_string(x1.size()) +
                            ", instance has dim " + std::to_string(instance.dim));
  }
  TrajectoryReport report;
  report.class1 = instance.class1;
  report.class2 = instance.class2;
  report.alpha = alpha;
  report.N = N;
  report.x.reserve(N + 1);
  report.y.reserve(N);
  report.x.push_back(x1);
  for (int k = 0; k < N; ++k) {
    const Vector& xk = report.x.back();
    const Vector g = instance.f2_subgrad(xk);
    const Vector yk = instance.solve_linearized(g);
    const double fermat = (instance.f1_subgrad(yk) - g).norm();
    if (!(fermat <= kFermatTol * (1.0 + g.norm()))) {
      throw SubproblemFailure("subproblem at iteration " + std::to_string(k + 1) +
                              " has Fermat residual " + num(fermat));
    }
    report.y.push_back(yk);
    report.x.push_back(yk + alpha * (yk - xk));
  }
  report.measure = std::numeric_limits<double>::infinity();
  for (const Vector& xk : report.x) {
    report.g1_x.push_back(instance.f1_subgrad(xk));
    report.g2_x.push_back(instance.f2_subgrad(xk));
    report.f_x.push_back(instance.f1_value(xk) - instance.f2_value(xk));
    const double crit = (report.g1_x.back() - report.g2_x.back()).squaredNorm();
    report.measure = std::min(report.measure, crit);
  }
  return report;
}

TrajectoryReport run_dca(const DCInstance& instance, const Vector& x1, int N) {
  return run_bdca(instance, x1, N, 0.0);
}

DCInstance gd_as_dca(const SmoothOracle& smooth_f, double L) {
  if (!std::isfinite(L) || L <= 0.0) {
    throw ParameterError("gd_as_dca needs L > 0, got " + num(L));
  }
  if (!smooth_f.value || !smooth_f.grad) {
    throw ParameterError("gd_as_dca needs both value and gradient oracles");
  }
  DCInstance inst;
  inst.f1_value = [L](const Vector& x) { return 0.5 * L * x.squaredNorm(); };
  inst.f2_value = [L, f = smooth_f.value](const Vector& x) {
    return 0.5 * L * x.squaredNorm() - f(x);
  };
  inst.f1_subgrad = [L](const Vector& x) { return Vector(L * x); };
  inst.f2_subgrad = [L, g = smooth_f.grad](const Vector& x) {
    return Vector(L * x - g(x));
  };
  inst.solve_linearized = [L](const Vector& g) { return Vector(g / L); };
  inst.class1 = CurvatureClass(0.0, L);
  inst.class2 = CurvatureClass(0.0, 2.0 * L);
  return inst;
}

double check_descent_direction(const TrajectoryReport& trajectory,
                               const std::function<Vector(const Vector&)>& grad_f,
                               double mu) {
  if (!std::isfinite(mu) || mu < 0.0) {
    throw ParameterError("descent check needs mu >= 0, got " + num(mu));
  }
  double min_slack = std::numeric_limits<double>::infinity();
  for (int k = 0; k < trajectory.N; ++k) {
    const Vector d = trajectory.y[k] - trajectory.x[k];
    const double slack = -mu * d.squaredNorm() - grad_f(trajectory.y[k]).dot(d);
    min_slack = std::min(min_slack, slack);
  }
  return min_slack;
}

double pl_ratio_check(const DCInstance& instance, double eta, const Vector& x1,
                      double alpha) {
  const double L = 0.5 * instance.class2.L;
  if (!std::isfinite(eta) || eta <= 0.0 || eta > L) {
    throw ParameterError("PL modulus must lie in (0, L] = (0, " + num(L) +
                         "], got " + num(eta));
  }
  const double beta = gd_pl_rate(eta / L, alpha).beta;
  const TrajectoryReport run = run_bdca(instance, x1, 1, alpha);
  if (!(run.f_x[0] > 0.0)) return 0.0;
  const double ratio = run.f_x[1] / run.f_x[0];
  if (ratio > beta + 1e-9 * (1.0 + std::abs(beta))) {
    throw ParameterError("observed ratio " + num(ratio) + " exceeds the rate " +
                         num(beta) + "; the PL claim does not hold here");
  }
  return ratio;
}

std::function<Vector(const Vector&)> bisection_linearized(
    std::function<Vector(const Vector&)> f1_subgrad) {
  return [f1_subgrad = std::move(f1_subgrad)](const Vector& g) {
    if (g.size() != 1) {
      throw DimensionMismatch("bisection fallback handles 1-D instances only");
    }
    const auto slope = [&](double t) {
      Vector p(1);
      p[0] = t;
      return f1_subgrad(p)[0] - g[0];
    };
    double lo = -1.0, hi = 1.0;
    int budget = 200;
    while (slope(lo) > 0.0 && budget-- > 0) lo *= 2.0;
    while (slope(hi) < 0.0 && budget-- > 0) hi *= 2.0;
    if (budget <= 0) {
      throw SubproblemFailure("bisection could not bracket the subproblem root");
    }
    while (hi - lo > 1e-15 * (1.0 + std::abs(lo) + std::abs(hi)) && budget-- > 0) {
      const double mid = 0.5 * (lo + hi);
      (slope(mid) < 0.0 ? lo : hi) = mid;
    }
    Vector y(1);
    y[0] = 0.5 * (lo + hi);
    return y;
  };
}

}  // namespace dcpep
