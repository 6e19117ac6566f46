#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <sstream>

#include "dcpep/bounds.hpp"
#include "dcpep/dca_engine.hpp"
#include "dcpep/gram_builder.hpp"
#include "dcpep/sdp_backend.hpp"

using namespace dcpep;

namespace {

Vector vec1(double v) {
  Vector x(1);
  x[0] = v;
  return x;
}

// f1 = x^2, f2 = x^2/2; DCA halves the iterate each step.
QuadraticDC halving() {
  Matrix A1(1, 1), A2(1, 1);
  A1 << 2.0;
  A2 << 1.0;
  return QuadraticDC(A1, Vector::Zero(1), 0.0, CurvatureClass(1, 2), A2,
                     Vector::Zero(1), 0.0, CurvatureClass(1, 2));
}

// Strongly convex difference: A1 spectrum well above A2's, so f = f1 - f2 has
// an attained minimum and Delta = f(x^1) - f* is finite.
QuadraticDC gapped_random(int dim, std::uint64_t seed) {
  const CurvatureClass cls(0.5, 1.0);
  return random_quadratic_dc(dim, cls, cls, seed, SpectrumRange{0.85, 1.0},
                             SpectrumRange{0.5, 0.6});
}

}  // namespace

TEST_CASE("dca halves the canonical 1-D instance") {
  const TrajectoryReport run = run_dca(halving().instance(), vec1(1.0), 2);
  REQUIRE(run.x.size() == 3);
  REQUIRE(run.y.size() == 2);
  CHECK(run.x[0][0] == doctest::Approx(1.0));
  CHECK(run.x[1][0] == doctest::Approx(0.5));
  CHECK(run.x[2][0] == doctest::Approx(0.25));
  // f = x^2/2 along the run
  CHECK(run.f_x[0] == doctest::Approx(0.5));
  CHECK(run.f_x[1] == doctest::Approx(0.125));
  CHECK(run.f_x[2] == doctest::Approx(0.03125));
  // g1 - g2 = x, so the criticality measure is the last iterate squared
  CHECK(run.measure == doctest::Approx(0.0625));
}

TEST_CASE("a critical start stays fixed") {
  const TrajectoryReport run = run_dca(halving().instance(), vec1(0.0), 3);
  for (const Vector& xk : run.x) CHECK(xk[0] == 0.0);
  CHECK(run.measure == 0.0);
}

TEST_CASE("boost alpha = 1 reaches the minimizer in one step") {
  const TrajectoryReport run = run_bdca(halving().instance(), vec1(1.0), 1, 1.0);
  CHECK(run.y[0][0] == doctest::Approx(0.5));
  CHECK(run.x[1][0] == doctest::Approx(0.0));
  CHECK(run.f_x[1] == doctest::Approx(0.0));
}

TEST_CASE("alpha = 0 reproduces plain dca bit for bit") {
  const DCInstance inst = gapped_random(3, 41).instance();
  Vector x1(3);
  x1 << 0.3, -1.2, 2.0;
  const TrajectoryReport a = run_dca(inst, x1, 4);
  const TrajectoryReport b = run_bdca(inst, x1, 4, 0.0);
  for (int k = 0; k <= 4; ++k) {
    CHECK((a.x[k] - b.x[k]).cwiseAbs().maxCoeff() == 0.0);
  }
  for (int k = 0; k < 4; ++k) {
    CHECK((a.y[k] - b.y[k]).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(a.measure == b.measure);
}

TEST_CASE("run parameters are validated") {
  const DCInstance inst = halving().instance();
  CHECK_THROWS_AS(run_dca(inst, vec1(1.0), 0), ParameterError);
  CHECK_THROWS_AS(run_bdca(inst, vec1(1.0), 1, -0.1), ParameterError);
  CHECK_THROWS_AS(run_bdca(inst, vec1(1.0), 1, 1.1), ParameterError);
  CHECK_THROWS_AS(run_dca(inst, Vector::Zero(2), 1), DimensionMismatch);
}

TEST_CASE("a lying subproblem oracle is caught") {
  DCInstance inst = halving().instance();
  inst.solve_linearized = [](const Vector& g) { return Vector(g * 10.0); };
  CHECK_THROWS_AS(run_dca(inst, vec1(1.0), 1), SubproblemFailure);
}

TEST_CASE("run measure stays under the plain dca bound") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 1 + trial % 4;
    const int N = 1 + trial % 3;
    const QuadraticDC q = gapped_random(dim, 1000 + trial);
    Vector x1(dim);
    for (int i = 0; i < dim; ++i) x1[i] = gauss(rng);
    const TrajectoryReport run = run_dca(q.instance(), x1, N);
    const double delta = run.f_x[0] - dc_minimum(q);
    REQUIRE(delta >= 0.0);
    if (delta == 0.0) {
      CHECK(run.measure <= 1e-18);
      continue;
    }
    const double bound = dca_sublinear_bound(0.5, 1.0, N, 0.0, delta).value;
    CHECK(run.measure <= bound * (1.0 + 1e-9));
  }
}

TEST_CASE("run measure stays under the matching pep optimum") {
  // One PEP solve at Delta = 1; the optimum scales linearly in Delta, so each
  // run compares against opt * Delta.
  const CurvatureClass cls(0.5, 1.0);
  const PEPProblem problem = build_pep(cls, cls, MethodConfig(2, 0.5), 1.0);
  const SDPInstance sdp = emit_sdp(problem, assign_basis(problem));
  const SolveResult res = solve(sdp, 1e-6);
  REQUIRE((res.status == SolveStatus::Optimal ||
           res.status == SolveStatus::NumericalTrouble));
  const double opt = res.opt_value;
  CHECK(opt > 0.0);

  std::mt19937_64 rng(21);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 1 + trial % 5;
    const QuadraticDC q = gapped_random(dim, 5000 + trial);
    Vector x1(dim);
    for (int i = 0; i < dim; ++i) x1[i] = gauss(rng);
    const TrajectoryReport run = run_bdca(q.instance(), x1, 2, 0.5);
    const double delta = run.f_x[0] - dc_minimum(q);
    REQUIRE(delta >= 0.0);
    CHECK(run.measure <= opt * delta * (1.0 + 1e-4) + 1e-12);
  }
}

TEST_CASE("runs interpolate their declared classes") {
  for (int trial = 0; trial < 20; ++trial) {
    const CurvatureClass cls(0.5, 1.0);
    const QuadraticDC q = random_quadratic_dc(3, cls, cls, 300 + trial);
    const DCInstance inst = q.instance();
    const TrajectoryReport run = run_bdca(inst, Vector::Ones(3), 3, 0.7);
    // collect (point, gradient, value) triples of each component over the run
    std::vector<DiscreteTriple> t1, t2;
    for (const Vector& p : run.x) {
      t1.push_back({p, inst.f1_subgrad(p), inst.f1_value(p)});
      t2.push_back({p, inst.f2_subgrad(p), inst.f2_value(p)});
    }
    for (const Vector& p : run.y) {
      t1.push_back({p, inst.f1_subgrad(p), inst.f1_value(p)});
      t2.push_back({p, inst.f2_subgrad(p), inst.f2_value(p)});
    }
    for (size_t i = 0; i < t1.size(); ++i) {
      for (size_t j = 0; j < t1.size(); ++j) {
        if (i == j) continue;
        CHECK(interpolation_residual(t1[i], t1[j], cls) <= 1e-9);
        CHECK(interpolation_residual(t2[i], t2[j], cls) <= 1e-9);
      }
    }
  }
}

TEST_CASE("gd_as_dca runs gradient descent") {
  SmoothOracle f;
  f.value = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  f.grad = [](const Vector& x) { return x; };
  const DCInstance inst = gd_as_dca(f, 1.0);

  // one plain step on the canonical quadratic lands on the minimizer
  const TrajectoryReport plain = run_dca(inst, vec1(1.0), 1);
  CHECK(plain.x[1][0] == doctest::Approx(0.0));

  // boosted iterates equal x - ((1+alpha)/L) grad f(x) componentwise
  for (double alpha : {0.0, 0.3, 1.0}) {
    Vector x1(3);
    x1 << 1.0, -2.0, 0.5;
    const TrajectoryReport run = run_bdca(inst, x1, 3, alpha);
    for (int k = 0; k < 3; ++k) {
      const Vector expected = run.x[k] - (1.0 + alpha) * f.grad(run.x[k]);
      CHECK((run.x[k + 1] - expected).lpNorm<Eigen::Infinity>() <= 1e-12);
    }
  }

  // alpha = 1 gives step 2/L
  const TrajectoryReport two = run_bdca(inst, vec1(1.0), 1, 1.0);
  CHECK(two.x[1][0] == doctest::Approx(1.0 - 2.0));
}

TEST_CASE("gd_as_dca validates its arguments") {
  SmoothOracle f;
  f.value = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  f.grad = [](const Vector& x) { return x; };
  CHECK_THROWS_AS(gd_as_dca(f, 0.0), ParameterError);
  SmoothOracle missing;
  CHECK_THROWS_AS(gd_as_dca(missing, 1.0), ParameterError);
}

TEST_CASE("descent direction slack is nonnegative on quadratic runs") {
  // the halving instance is exactly tight for the descent lemma at mu = 1
  const QuadraticDC h = halving();
  const DCInstance hi = h.instance();
  const auto grad_h = [&](const Vector& p) {
    return Vector(hi.f1_subgrad(p) - hi.f2_subgrad(p));
  };
  const TrajectoryReport fixed = run_dca(hi, vec1(0.0), 2);
  CHECK(check_descent_direction(fixed, grad_h, 1.0) == 0.0);
  const TrajectoryReport moving = run_dca(hi, vec1(1.0), 3);
  CHECK(check_descent_direction(moving, grad_h, 1.0) >= -1e-12);

  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 1 + trial % 4;
    const QuadraticDC q = gapped_random(dim, 9000 + trial);
    const DCInstance inst = q.instance();
    const auto grad_f = [&](const Vector& p) {
      return Vector(inst.f1_subgrad(p) - inst.f2_subgrad(p));
    };
    Vector x1(dim);
    for (int i = 0; i < dim; ++i) x1[i] = gauss(rng);
    const TrajectoryReport run = run_bdca(inst, x1, 3, 0.5);
    CHECK(check_descent_direction(run, grad_f, 0.5) >= -1e-9);
    // mu = 0 weakens the requirement to a plain descent direction
    CHECK(check_descent_direction(run, grad_f, 0.0) >=
          check_descent_direction(run, grad_f, 0.5));
  }
}

TEST_CASE("pl ratio check matches the scalar closed form") {
  const auto kappa_quadratic = [](double kappa) {
    SmoothOracle f;
    f.value = [kappa](const Vector& x) { return 0.5 * kappa * x.squaredNorm(); };
    f.grad = [kappa](const Vector& x) { return Vector(kappa * x); };
    return f;
  };

  // starting at the minimizer returns 0 by convention
  const DCInstance at_min = gd_as_dca(kappa_quadratic(0.5), 1.0);
  CHECK(pl_ratio_check(at_min, 0.5, vec1(0.0), 0.2) == 0.0);

  // kappa = 1, alpha = 0: one exact gradient step lands on the minimizer
  const DCInstance exact = gd_as_dca(kappa_quadratic(1.0), 1.0);
  CHECK(pl_ratio_check(exact, 1.0, vec1(3.0), 0.0) ==
        doctest::Approx(0.0).epsilon(1e-12));

  // kappa = 0.5, alpha = 0.2: ratio (1 - 1.2 * 0.5)^2 = 0.16 under beta = 0.38
  const DCInstance half = gd_as_dca(kappa_quadratic(0.5), 1.0);
  const double ratio = pl_ratio_check(half, 0.5, vec1(1.0), 0.2);
  CHECK(ratio == doctest::Approx(0.16));
  CHECK(gd_pl_rate(0.5, 0.2).beta == doctest::Approx(0.38));

  // the optimal boost achieves (1 - (1+alpha*) kappa)^2 <= beta(alpha*)
  for (double kappa : {0.25, 0.5, 0.75}) {
    const OptimalBoost best = optimal_boost(kappa);
    const DCInstance inst = gd_as_dca(kappa_quadratic(kappa), 1.0);
    const double r = pl_ratio_check(inst, kappa, vec1(1.0), best.alpha_star);
    const double direct = std::pow(1.0 - (1.0 + best.alpha_star) * kappa, 2);
    CHECK(r == doctest::Approx(direct));
    CHECK(r <= best.rate + 1e-12);
    CHECK(best.rate ==
          doctest::Approx((4.0 - std::pow(kappa, 3) - 3.0 * kappa) /
                          std::pow(2.0 + kappa, 2)));
  }

  // claiming a larger PL modulus than the function has gets rejected
  const DCInstance weak = gd_as_dca(kappa_quadratic(0.1), 1.0);
  CHECK_THROWS_AS(pl_ratio_check(weak, 0.9, vec1(1.0), 0.0), ParameterError);
  // modulus above L is rejected outright
  CHECK_THROWS_AS(pl_ratio_check(weak, 1.5, vec1(1.0), 0.0), ParameterError);
}

TEST_CASE("quadratic construction validates shape and spectrum") {
  Matrix A1(1, 1), A2(1, 1);
  A1 << 2.0;
  A2 << 1.0;
  const CurvatureClass cls(1, 2);
  // eigenvalue outside the declared class
  CHECK_THROWS_AS(QuadraticDC(A1, Vector::Zero(1), 0.0, CurvatureClass(1, 1.5),
                              A2, Vector::Zero(1), 0.0, cls),
                  ClassMismatch);
  // A1 must be positive definite
  Matrix Z = Matrix::Zero(1, 1);
  CHECK_THROWS_AS(QuadraticDC(Z, Vector::Zero(1), 0.0, CurvatureClass(0, 2), A2,
                              Vector::Zero(1), 0.0, CurvatureClass(0, 2)),
                  ParameterError);
  // dimension disagreement
  CHECK_THROWS_AS(QuadraticDC(A1, Vector::Zero(2), 0.0, cls, A2, Vector::Zero(1),
                              0.0, cls),
                  DimensionMismatch);
  // asymmetry
  Matrix S(2, 2);
  S << 1.0, 0.5, -0.5, 1.0;
  CHECK_THROWS_AS(QuadraticDC(S, Vector::Zero(2), 0.0, CurvatureClass(0, 2),
                              Matrix::Identity(2, 2), Vector::Zero(2), 0.0,
                              CurvatureClass(0, 2)),
                  ParameterError);
}

TEST_CASE("random instances live in their declared classes") {
  for (int trial = 0; trial < 10; ++trial) {
    const CurvatureClass c1(0.2, 3.0), c2(0.0, 1.0);
    const QuadraticDC q = random_quadratic_dc(4, c1, c2, 77 + trial);
    Eigen::SelfAdjointEigenSolver<Matrix> e1(q.A1), e2(q.A2);
    CHECK(e1.eigenvalues().minCoeff() >= c1.mu - 1e-9);
    CHECK(e1.eigenvalues().maxCoeff() <= c1.L + 1e-9);
    CHECK(e2.eigenvalues().minCoeff() >= c2.mu - 1e-9);
    CHECK(e2.eigenvalues().maxCoeff() <= c2.L + 1e-9);
    CHECK(e1.eigenvalues().minCoeff() > 0.0);
  }
  CHECK_THROWS_AS(random_quadratic_dc(2, CurvatureClass(0, 1), CurvatureClass(0, 1),
                                      1, SpectrumRange{0.5, 2.0}),
                  ParameterError);
}

TEST_CASE("dc minimum solves the difference quadratic") {
  const QuadraticDC q = gapped_random(3, 55);
  const double fstar = dc_minimum(q);
  const DCInstance inst = q.instance();
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss;
  for (int i = 0; i < 20; ++i) {
    Vector p(3);
    for (int j = 0; j < 3; ++j) p[j] = gauss(rng);
    CHECK(inst.f1_value(p) - inst.f2_value(p) >= fstar - 1e-12);
  }
  // equal curvature blocks leave no attained minimum
  const QuadraticDC flat = halving();
  Matrix A(1, 1);
  A << 2.0;
  const QuadraticDC same(A, Vector::Zero(1), 0.0, CurvatureClass(1, 2), A,
                         Vector::Zero(1), 1.0, CurvatureClass(1, 2));
  CHECK(dc_minimum(flat) == doctest::Approx(0.0));
  CHECK_THROWS_AS(dc_minimum(same), DegenerateError);
}

TEST_CASE("instance files round-trip and validate on read") {
  const QuadraticDC q = gapped_random(3, 123);
  std::stringstream buffer;
  save_quadratic_dc(q, buffer);
  const QuadraticDC back = load_quadratic_dc(buffer);
  CHECK((back.A1 - q.A1).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((back.A2 - q.A2).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((back.b1 - q.b1).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((back.b2 - q.b2).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(back.c1 == q.c1);
  CHECK(back.c2 == q.c2);
  CHECK(back.class1.mu == q.class1.mu);
  CHECK(back.class2.L == q.class2.L);

  std::stringstream bad_magic("not-an-instance 1\n");
  CHECK_THROWS_AS(load_quadratic_dc(bad_magic), IoError);
  std::stringstream truncated("quadratic-dc 1\ndim 2\nclass1 0 1\n");
  CHECK_THROWS_AS(load_quadratic_dc(truncated), IoError);
  // declared class narrower than the spectrum: rejected on read
  std::stringstream lying(
      "quadratic-dc 1\ndim 1\nclass1 0 1\nclass2 0 1\n"
      "A1\n5\nb1\n0\nc1 0\nA2\n0.5\nb2\n0\nc2 0\n");
  CHECK_THROWS_AS(load_quadratic_dc(lying), IoError);
  CHECK_THROWS_AS(load_quadratic_dc("/nonexistent/path.dcinst"), IoError);
}

TEST_CASE("the shipped halving instance file runs as documented") {
  const QuadraticDC q = load_quadratic_dc(std::string(DCPEP_TEST_DATA) +
                                          "/halving.dcinst");
  const TrajectoryReport run = run_dca(q.instance(), vec1(1.0), 2);
  CHECK(run.x[1][0] == doctest::Approx(0.5));
  CHECK(run.x[2][0] == doctest::Approx(0.25));
  CHECK(run.f_x[2] == doctest::Approx(0.03125));
}

TEST_CASE("bisection fallback solves 1-D subproblems") {
  // f1 = x^2 has subgradient 2x; the fallback must invert it
  DCInstance inst = halving().instance();
  inst.solve_linearized = bisection_linearized(inst.f1_subgrad);
  const TrajectoryReport run = run_dca(inst, vec1(1.0), 2);
  CHECK(run.x[1][0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(run.x[2][0] == doctest::Approx(0.25).epsilon(1e-10));
  const auto solver = bisection_linearized(inst.f1_subgrad);
  CHECK_THROWS_AS(solver(Vector::Zero(2)), DimensionMismatch);
}
