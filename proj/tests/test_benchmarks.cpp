#include "addbo/benchmarks.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace addbo;

TEST_CASE("Styblinski-Tang values") {
  CHECK(styblinski_tang(Vector::Zero(7)) == 0.0);
  CHECK(styblinski_tang(Vector::Ones(2)) == -10.0);
  CHECK_THROWS_AS(styblinski_tang(Vector::Constant(2, 5.5)), UsageError);
  CHECK_NOTHROW(styblinski_tang(Vector::Constant(3, -5.0)));
  CHECK(std::isfinite(styblinski_tang(Vector::Constant(3, 5.0))));
}

TEST_CASE("1-D minimum against a dense grid") {
  const auto m = styblinski_tang_1d_minimum();
  const auto [gx, gv] = oracle::grid_min_1d(styblinski_tang_term, -5.0, 5.0, 100001);
  CHECK(std::abs(m.value - gv) <= 1e-4);
  CHECK(m.value <= gv);
  CHECK(std::abs(m.x - gx) <= 1e-3);
  CHECK(m.x == doctest::Approx(-2.9035).epsilon(1e-4));
  CHECK(10.0 * m.value == doctest::Approx(-391.66).epsilon(1e-5));
}

TEST_CASE("benchmark problems") {
  const auto st = benchmark_problem("styblinski_tang", 10);
  CHECK(st.space.dim() == 10);
  CHECK(st.decomposition->num_groups() == 10);
  CHECK(st.decomposition->effective_dim() == 1);
  CHECK(st.space.lower() == Vector::Constant(10, -5));
  CHECK(*st.known_optimum == doctest::Approx(-391.66).epsilon(1e-5));
  CHECK(st.objective(Vector::Constant(10, styblinski_tang_1d_minimum().x)).value == doctest::Approx(*st.known_optimum));

  const auto one = benchmark_problem("styblinski_tang", 1);
  CHECK(one.decomposition->num_groups() == 1);
  CHECK(*one.known_optimum == doctest::Approx(-39.166).epsilon(1e-4));

  const auto q = benchmark_problem("separable_quadratic", 4);
  CHECK(*q.known_optimum == 0.0);
  Vector c(4);
  c << -4.0, -4.0 + 8.0 / 3.0, -4.0 + 16.0 / 3.0, 4.0;
  CHECK(q.objective(c).value == doctest::Approx(0.0).scale(1.0));

  CHECK_THROWS_WITH_AS(benchmark_problem("rosenbrock", 2), doctest::Contains("styblinski_tang"), UsageError);
  CHECK_THROWS_AS(benchmark_problem("styblinski_tang", 0), UsageError);
}

TEST_CASE("separability") {
  Rng rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int k = 0; k < 200; ++k) {
    Vector x(6);
    for (Index i = 0; i < 6; ++i)
      x[i] = u(rng);
    const Index i = k % 6;
    Vector y = x;
    y[i] = u(rng);
    const double diff = styblinski_tang(x) - styblinski_tang(y);
    CHECK(std::abs(diff - (styblinski_tang_term(x[i]) - styblinski_tang_term(y[i]))) <= 1e-12);
  }
}
