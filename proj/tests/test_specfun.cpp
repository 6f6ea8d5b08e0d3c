#include <doctest.h>

#include <cmath>

#include "pep/rng.hpp"
#include "pep/specfun.hpp"

namespace sf = pep::specfun;

namespace {

/// Truncated double series of F1(a; b1, b2; c; x, y); valid for |x|,|y| < 1.
/// Terms are built by recurrence so the factorials never overflow.
double f1_series(double a, double b1, double b2, double c, double x, double y) {
  double s = 0.0;
  double row0 = 1.0;  // term at (m, 0)
  for (int m = 0; m < 400; ++m) {
    double t = row0;
    for (int n = 0; n < 400 - m; ++n) {
      s += t;
      t *= (a + m + n) * (b2 + n) / ((c + m + n) * (n + 1.0)) * y;
      if (std::fabs(t) < 1e-18 * std::fabs(s)) break;
    }
    row0 *= (a + m) * (b1 + m) / ((c + m) * (m + 1.0)) * x;
    if (std::fabs(row0) < 1e-18 * std::fabs(s)) break;
  }
  return s;
}

double gauss_series(double a, double b, double c, double z) {
  double term = 1.0, s = 1.0;
  for (int k = 0; k < 600; ++k) {
    term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
    s += term;
    if (std::fabs(term) < 1e-17 * std::fabs(s)) break;
  }
  return s;
}

}  // namespace

TEST_SUITE("specfun") {

TEST_CASE("log gamma against exact values") {
  CHECK(sf::log_gamma(1.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(sf::log_gamma(4.0) == doctest::Approx(std::log(6.0)).epsilon(1e-14));
  CHECK(sf::log_gamma(0.5) == doctest::Approx(0.5723649429247001).epsilon(1e-13));
  CHECK(sf::log_gamma(0.1) == doctest::Approx(2.252712651734206).epsilon(1e-13));
  CHECK(sf::log_beta(2.0, 3.0) == doctest::Approx(std::log(1.0 / 12.0)).epsilon(1e-13));
}

TEST_CASE("log-domain quadrature on known integrals") {
  const double inf = std::numeric_limits<double>::infinity();
  auto g = sf::integrate_log([](double x) { return -0.5 * x * x; }, -inf, inf);
  CHECK(g.converged);
  CHECK(g.log_value == doctest::Approx(0.5 * std::log(2.0 * M_PI)).epsilon(1e-9));

  auto e = sf::integrate_log([](double x) { return -x; }, 0.0, inf);
  CHECK(e.log_value == doctest::Approx(0.0).epsilon(1e-9));

  const double a = 7.3;
  auto gm = sf::integrate_log([&](double x) { return (a - 1.0) * std::log(x) - x; }, 0.0, inf);
  CHECK(gm.log_value == doctest::Approx(sf::log_gamma(a)).epsilon(1e-9));
}

TEST_CASE("quadrature is shift-invariant at extreme magnitudes") {
  const double inf = std::numeric_limits<double>::infinity();
  auto lo = sf::integrate_log([](double x) { return -1000.0 - 0.5 * x * x; }, -inf, inf);
  CHECK(lo.log_value ==
        doctest::Approx(-1000.0 + 0.5 * std::log(2.0 * M_PI)).epsilon(1e-9));
  auto hi = sf::integrate_log([](double x) { return 900.0 - 0.5 * x * x; }, -inf, inf);
  CHECK(hi.log_value == doctest::Approx(900.0 + 0.5 * std::log(2.0 * M_PI)).epsilon(1e-9));
}

TEST_CASE("2F1 against its closed form and series") {
  CHECK(sf::gauss_2f1(1.0, 1.0, 2.0, -1.0).value() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-10));
  CHECK(sf::gauss_2f1(2.3, 0.7, 3.1, 0.0).value() == doctest::Approx(1.0).epsilon(1e-12));
  pep::CounterRng rng(5);
  for (int i = 0; i < 30; ++i) {
    const double b = 0.2 + 3.0 * rng.uniform();
    const double c = b + 0.2 + 3.0 * rng.uniform();
    const double a = 0.1 + 2.0 * rng.uniform();
    const double z = -0.9 * rng.uniform();
    CHECK(sf::gauss_2f1(a, b, c, z).value() ==
          doctest::Approx(gauss_series(a, b, c, z)).epsilon(1e-9));
  }
}

TEST_CASE("Kummer M against its closed form") {
  // M(1, 2, z) = (e^z - 1)/z
  CHECK(sf::kummer_m(1.0, 2.0, -1.0).value() ==
        doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-10));
  CHECK(sf::kummer_m(0.7, 1.9, 0.0).value() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Appell F1 against the double series") {
  pep::CounterRng rng(9);
  for (int i = 0; i < 20; ++i) {
    const double a = 0.3 + 2.0 * rng.uniform();
    const double c = a + 0.3 + 2.0 * rng.uniform();
    const double b1 = 0.2 + 2.0 * rng.uniform();
    const double b2 = -2.0 + 4.0 * rng.uniform();
    const double x = 0.5 * rng.uniform();
    const double y = 0.5 * rng.uniform();
    const double exact = f1_series(a, b1, b2, c, x, y);
    CHECK(sf::appell_f1(a, b1, b2, c, x, y).value() ==
          doctest::Approx(exact).epsilon(1e-9));
  }
}

TEST_CASE("Appell F1 degenerate-argument reductions") {
  pep::CounterRng rng(13);
  for (int i = 0; i < 40; ++i) {
    const double a = 0.3 + 2.0 * rng.uniform();
    const double c = a + 0.3 + 2.0 * rng.uniform();
    const double b1 = 0.2 + 2.0 * rng.uniform();
    const double b2 = -2.0 + 4.0 * rng.uniform();
    const double x = 0.7 * rng.uniform();
    // y = 0 drops the second factor: F1 -> 2F1(b1, a; c; x)
    CHECK(sf::appell_f1(a, b1, b2, c, x, 0.0).value() ==
          doctest::Approx(gauss_series(a, b1, c, x)).epsilon(1e-10));
    // b1 = b2 = 0 integrates the pure Beta kernel: F1 = 1
    CHECK(sf::appell_f1(a, 0.0, 0.0, c, x, 0.3).value() ==
          doctest::Approx(1.0).epsilon(1e-10));
    // equal arguments collapse to a single Gauss function
    CHECK(sf::appell_f1(a, b1, b2, c, x, x).value() ==
          doctest::Approx(gauss_series(a, b1 + b2, c, x)).epsilon(1e-9));
  }
}

TEST_CASE("F1 near-unit first argument still converges") {
  // the regime the evidence formula hits when R10 is tiny
  const double v = sf::appell_f1(2.0, 10.0, -12.0, 5.0, 1.0 - 1e-9, 0.02).log_magnitude;
  CHECK(std::isfinite(v));
}

}  // TEST_SUITE
