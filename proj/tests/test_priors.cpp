#include <doctest.h>

#include <cmath>

#include "pep/priors.hpp"

using namespace pep;

namespace {

double density_integral(const SgbpParams& prm) {
  auto fn = [&](double g) {
    const LogValue d = log_density_g(prm, g);
    return d.is_zero() ? -std::numeric_limits<double>::infinity() : d.log_magnitude;
  };
  return std::exp(
      specfun::integrate_log(fn, prm.s, std::numeric_limits<double>::infinity()).log_value);
}

}  // namespace

TEST_SUITE("priors") {

TEST_CASE("family names round trip") {
  for (Family f : {Family::PEP, Family::EPP, Family::Intrinsic, Family::HyperG, Family::HyperGN,
                   Family::Robust, Family::Benchmark, Family::MG, Family::FixedG})
    CHECK(family_from_name(family_name(f)) == f);
  CHECK_THROWS(family_from_name("zellner"));
}

TEST_CASE("default resolution of delta, n_star, and fixed g") {
  PriorSpec pep_spec;
  CHECK(pep_spec.resolve_delta(50, 3) == 50.0);
  CHECK(pep_spec.resolve_n_star(50, 3) == 50);
  PriorSpec epp;
  epp.family = Family::EPP;
  CHECK(epp.resolve_delta(50, 3) == 1.0);
  PriorSpec intr;
  intr.family = Family::Intrinsic;
  CHECK(intr.resolve_delta(50, 4) == doctest::Approx(10.0));
  CHECK(intr.resolve_n_star(50, 4) == 5);
  PriorSpec fg;
  fg.family = Family::FixedG;
  CHECK(fg.resolve_g_fixed(37) == 37.0);
}

TEST_CASE("mixing parameters per family") {
  const int n = 50, k0 = 1, k1 = 4;
  PriorSpec spec;  // PEP defaults
  SgbpParams prm = mixing_params(spec, k0, k1, n, 0);
  CHECK(prm.a == doctest::Approx(0.5 * (n - k1)));
  CHECK(prm.b == doctest::Approx(0.5 * (n - k1)));
  CHECK(prm.p == 1.0);
  CHECK(prm.q == doctest::Approx(n));
  CHECK(prm.s == doctest::Approx(n));

  spec.family = Family::HyperG;
  spec.a_h = 3.0;
  prm = mixing_params(spec, k0, k1, n, 0);
  CHECK(prm.a == doctest::Approx(0.5));
  CHECK(prm.b == 1.0);
  CHECK(prm.q == 1.0);
  CHECK(prm.s == 0.0);

  spec.family = Family::HyperGN;
  prm = mixing_params(spec, k0, k1, n, 0);
  CHECK(prm.q == doctest::Approx(n));

  spec.family = Family::Robust;
  prm = mixing_params(spec, k0, k1, n, 0);
  // default rho = 1/(k0+k1): q = (b_r + n) rho, s = q - b_r
  CHECK(prm.q == doctest::Approx((1.0 + n) / (k0 + k1)));
  CHECK(prm.s == doctest::Approx(prm.q - 1.0));

  spec.family = Family::Benchmark;
  prm = mixing_params(spec, k0, k1, n, 15);
  CHECK(prm.a == doctest::Approx(0.01));
  CHECK(prm.b == doctest::Approx(0.01 * 225.0));

  spec.family = Family::MG;
  prm = mixing_params(spec, k0, k1, n, 15);
  CHECK(prm.a == doctest::Approx(0.25));
  CHECK(prm.b == doctest::Approx(0.5 * (n - 15 - 5) + 0.75));

  spec.family = Family::FixedG;
  CHECK_THROWS_AS(mixing_params(spec, k0, k1, n, 0), DegenerateFamily);
}

TEST_CASE("mixing densities integrate to one") {
  CHECK(density_integral({2.0, 3.0, 1.0, 5.0, 5.0}) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(density_integral({0.5, 1.0, 1.0, 1.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(density_integral({23.0, 23.0, 1.0, 50.0, 50.0}) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(density_integral({0.25, 15.75, 1.0, 1.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("inverse transform sampling matches the density (first moment)") {
  const SgbpParams prm{4.0, 3.0, 1.0, 7.0, 7.0};
  // E g = s + q E[(1-t)/t] with t ~ Beta(a,b): E[(1-t)/t] = b/(a-1)
  const double exact = prm.s + prm.q * prm.b / (prm.a - 1.0);
  CounterRng rng(3);
  double s = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double g = sample_g(prm, rng);
    REQUIRE(g >= prm.s);
    s += g;
  }
  CHECK(std::fabs(s / n - exact) / exact < 0.02);
}

TEST_CASE("prior shrinkage moments against direct integration") {
  const SgbpParams prm{3.0, 4.0, 1.0, 9.0, 9.0};
  const ShrinkagePriorSummary sm = prior_w_moments(prm);
  auto moment = [&](int k) {
    auto fn = [&](double g) {
      return k * (std::log(g) - std::log1p(g)) + log_density_g(prm, g).log_magnitude;
    };
    return std::exp(
        specfun::integrate_log(fn, prm.s, std::numeric_limits<double>::infinity()).log_value);
  };
  CHECK(sm.mean_w == doctest::Approx(moment(1)).epsilon(1e-7));
  CHECK(sm.var_w == doctest::Approx(moment(2) - moment(1) * moment(1)).epsilon(1e-5));
  // the Taylor expansion is close for a concentrated Beta
  CHECK(std::fabs(sm.mean_w_approx - sm.mean_w) < 0.01);
  CHECK(std::fabs(sm.sd_w_approx - std::sqrt(sm.var_w)) < 0.01);
}

TEST_CASE("inverse Beta moment identity") {
  CHECK(inverse_t_moment(3.0, 2.0) == doctest::Approx(2.0));
  CHECK_THROWS(inverse_t_moment(1.0, 2.0));
}

TEST_CASE("heavy-tail mixing law integrates to one") {
  auto fn = [](double g) { return log_density_g_zellner_siow(g, 40); };
  const double v =
      std::exp(specfun::integrate_log(fn, 0.0, std::numeric_limits<double>::infinity()).log_value);
  CHECK(v == doctest::Approx(1.0).epsilon(1e-8));
}

}  // TEST_SUITE
