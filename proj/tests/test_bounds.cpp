#include <doctest.h>

#include <cmath>

#include "dcpep/bounds.hpp"

using namespace dcpep;

TEST_CASE("sublinear bound values") {
  CHECK(dca_sublinear_bound(0, 1, 1, 0, 1).value == doctest::Approx(2.0 / 3.0));
  CHECK(dca_sublinear_bound(0.5, 1, 10, 1, 1).value == doctest::Approx(0.0625));
  // alpha = 0 reduces to the plain DCA bound L Delta / (N + 1/(2(1-kappa))).
  for (double kappa : {0.0, 0.25, 0.6}) {
    for (int N : {1, 3, 7}) {
      const double L = 2.0, delta = 0.5;
      const double expected = L * delta / (N + 1.0 / (2.0 * (1.0 - kappa)));
      CHECK(dca_sublinear_bound(kappa * L, L, N, 0, delta).value ==
            doctest::Approx(expected));
    }
  }
}

TEST_CASE("sublinear bound domain") {
  CHECK_THROWS_AS(dca_sublinear_bound(0, 1, 1, 0.1, 1), ParameterError);
  CHECK_THROWS_AS(dca_sublinear_bound(0.1, 1, 1, 0.3, 1), ParameterError);
  CHECK_THROWS_AS(dca_sublinear_bound(0.6, 1, 1, 1.0 + 1e-9, 1), ParameterError);
  CHECK_THROWS_AS(dca_sublinear_bound(1, 1, 1, 0, 1), ParameterError);
  CHECK_THROWS_AS(dca_sublinear_bound(0, 1, 0, 0, 1), ParameterError);
  CHECK_THROWS_AS(dca_sublinear_bound(0, 1, 1, 0, 0), ParameterError);
  CHECK_NOTHROW(dca_sublinear_bound(0.1, 1, 1, 0.2, 1));
  CHECK_NOTHROW(dca_sublinear_bound(0.6, 1, 1, 1.0, 1));
}

TEST_CASE("sublinear bound decreases in alpha") {
  for (double kappa : {0.1, 0.3, 0.5}) {
    double prev = dca_sublinear_bound(kappa, 1, 5, 0, 1).value;
    const double amax = std::min(1.0, 2 * kappa);
    for (int i = 1; i <= 10; ++i) {
      const double alpha = amax * i / 10.0;
      const double cur = dca_sublinear_bound(kappa, 1, 5, alpha, 1).value;
      CHECK(cur < prev);
      prev = cur;
    }
  }
}

TEST_CASE("sublinear bound continuity in mu near zero") {
  const double at_zero = dca_sublinear_bound(0, 1, 4, 0, 1).value;
  const double near_zero = dca_sublinear_bound(1e-9, 1, 4, 0, 1).value;
  CHECK(std::abs(at_zero - near_zero) < 1e-8);
}

TEST_CASE("gd-pl rate values") {
  CHECK(gd_pl_rate(1.0, 0.0).beta == doctest::Approx(0.0));
  CHECK(gd_pl_rate(0.5, 0.0).beta == doctest::Approx(0.4));
  CHECK(gd_pl_rate(0.5, 0.2).beta == doctest::Approx(0.38));
}

TEST_CASE("gd-pl rate domain") {
  // At kappa = 0.5 the admissible root is about 0.7165, so alpha = 1 fails.
  CHECK(gd_pl_alpha_max(0.5) == doctest::Approx(0.71651).epsilon(1e-4));
  CHECK_THROWS_AS(gd_pl_rate(0.5, 1.0), ParameterError);
  CHECK_THROWS_AS(gd_pl_rate(0.0, 0.0), ParameterError);
  CHECK_THROWS_AS(gd_pl_rate(1.1, 0.0), ParameterError);
  CHECK_THROWS_AS(gd_pl_rate(0.5, -0.1), ParameterError);
  CHECK_NOTHROW(gd_pl_rate(0.5, gd_pl_alpha_max(0.5)));
}

TEST_CASE("beta is a parabola with vertex at alpha*") {
  for (int i = 1; i <= 20; ++i) {
    const double kappa = i / 20.0;
    const double astar = optimal_boost(kappa).alpha_star;
    const double at_vertex = gd_pl_rate(kappa, astar).beta;
    const double d = 0.8 * std::min(astar, gd_pl_alpha_max(kappa) - astar) + 1e-6;
    CHECK(gd_pl_rate(kappa, astar + d).beta >= at_vertex);
    if (astar - d >= 0) {
      CHECK(gd_pl_rate(kappa, astar - d).beta >= at_vertex);
      CHECK(gd_pl_rate(kappa, astar - d).beta ==
            doctest::Approx(gd_pl_rate(kappa, astar + d).beta));
    }
  }
}

TEST_CASE("beta at kappa=1 is alpha squared") {
  for (int i = 0; i <= 10; ++i) {
    const double alpha = 0.5 * i / 10.0;
    CHECK(gd_pl_rate(1.0, alpha).beta == doctest::Approx(alpha * alpha));
  }
}

TEST_CASE("beta stays within [0,1) on the admissible region") {
  for (int i = 1; i <= 40; ++i) {
    const double kappa = i / 40.0;
    const double amax = gd_pl_alpha_max(kappa);
    for (int j = 0; j <= 40; ++j) {
      const double beta = gd_pl_rate(kappa, amax * j / 40.0).beta;
      CHECK(beta >= -1e-15);
      CHECK(beta < 1.0);
    }
  }
}

TEST_CASE("optimal boost values") {
  auto at_one = optimal_boost(1.0);
  CHECK(at_one.alpha_star == doctest::Approx(0.0));
  CHECK(at_one.rate == doctest::Approx(0.0));
  CHECK(at_one.step_length_times_L == doctest::Approx(1.0));

  auto at_half = optimal_boost(0.5);
  CHECK(at_half.alpha_star == doctest::Approx(0.2));
  CHECK(at_half.rate == doctest::Approx(0.38));
  CHECK(at_half.step_length_times_L == doctest::Approx(1.2));

  CHECK_THROWS_AS(optimal_boost(0.0), ParameterError);
  CHECK_THROWS_AS(optimal_boost(1.5), ParameterError);
}

TEST_CASE("optimal boost matches the parabola vertex on a grid") {
  double worst = 0.0;
  for (int i = 1; i <= 100; ++i) {
    const double kappa = i / 100.0;
    auto boost = optimal_boost(kappa);
    worst = std::max(worst,
                     std::abs(boost.rate - gd_pl_rate(kappa, boost.alpha_star).beta));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("prior step length") {
  CHECK(prior_step_length(1.0, 1.0) == doctest::Approx(1.0));
  CHECK(prior_step_length(1e-12, 1.0) == doctest::Approx(1.5));
  CHECK(prior_step_length(1.0 / 9.0, 1.0) == doctest::Approx(1.5));
  CHECK(prior_step_length(1.0 / 9.0, 2.0) == doctest::Approx(0.75));
  // Below kappa = 1/9 the 3/(2L) branch is active, above it the other one.
  CHECK(prior_step_length(0.01, 1.0) == doctest::Approx(1.5));
  CHECK(prior_step_length(0.25, 1.0) == doctest::Approx(2.0 / 1.5));
  CHECK_THROWS_AS(prior_step_length(0.5, 0.0), ParameterError);
}
