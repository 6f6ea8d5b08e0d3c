#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "pep/logvalue.hpp"
#include "pep/rng.hpp"
#include "pep/specfun.hpp"

namespace pep {

enum class Family { PEP, EPP, Intrinsic, HyperG, HyperGN, Robust, Benchmark, MG, FixedG };

std::string family_name(Family f);
Family family_from_name(const std::string& name);

/// Prior family tag plus its hyper-parameters. Values left as NaN take the
/// documented defaults at use time (delta = n_star = n, recommended constants).
struct PriorSpec {
  Family family = Family::PEP;
  double delta = std::nan("");   // power parameter; PEP default n, EPP forces 1
  int n_star = -1;               // training size; default n, minimal k1+1
  double d0 = 0.0, d1 = 0.0;     // baseline prior exponents
  double a_h = 3.0;              // hyper-g family
  double a_r = 0.5;              // robust
  double b_r = 1.0;
  double rho_1r = std::nan("");  // robust; default 1/(k0+k1)
  double c_b = 0.01;             // benchmark
  double a_mg = std::nan("");    // MG; defaults to the recommended row
  double b_mg = std::nan("");
  double q_mg = std::nan("");    // MG footnote constraint: q_mg < n-1
  double g_fixed = std::nan("");  // FixedG; default n

  /// Resolved delta for a model of dimension k1 (Intrinsic: n/(k1+1)).
  double resolve_delta(int n, int k1) const;
  int resolve_n_star(int n, int k1) const;
  double resolve_g_fixed(int n) const;
};

/// Parameters of the shifted generalized beta prime mixing law; support g >= s.
struct SgbpParams {
  double a, b, p, q, s;
};

struct ShrinkagePriorSummary {
  double mean_w;
  double var_w;
  double mean_w_approx;
  double sd_w_approx;
};

/// Raised when the family has no mixing distribution (FixedG point mass).
struct DegenerateFamily : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The SGBP parameter 5-tuple for the given family and model dimensions.
SgbpParams mixing_params(const PriorSpec& spec, int k0, int k1, int n, int p_total);

/// Log of the SGBP density at g; sign 0 below the support point s.
LogValue log_density_g(const SgbpParams& params, double g);

/// Exact inverse-transform draw: t ~ Beta(a,b), g = s + q ((1-t)/t)^(1/p).
double sample_g(const SgbpParams& params, CounterRng& rng);

/// Prior mean/variance of the shrinkage w = g/(g+1) for PEP-shaped params
/// (p = 1, q = s = delta), via the 2F1 formulas, plus the Taylor approximation.
ShrinkagePriorSummary prior_w_moments(const SgbpParams& params);

/// Second-order Taylor approximation of E[w], sd[w] around the Beta mean of t.
void taylor_w_approx(double a, double b, double delta, double* mean, double* sd);

/// Inverse moment E[1/t] = (a+b-1)/(a-1) of Beta(a,b); requires a > 1.
double inverse_t_moment(double a, double b);

/// Log density of the Zellner-Siow mixing law, an inverted gamma with shape
/// 1/2 and scale n/2; consumed only by the generic quadrature evidence path.
double log_density_g_zellner_siow(double g, int n);

}  // namespace pep
