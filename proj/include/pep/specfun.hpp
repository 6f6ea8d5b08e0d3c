#pragma once

#include <functional>
#include <stdexcept>
#include <string>

#include "pep/logvalue.hpp"

namespace pep::specfun {

struct QuadratureSpec {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_subdivisions = 500;
};

struct LogIntegral {
  double log_value;  // log of the integral of exp(fn)
  double log_error;  // log of the estimated absolute error
  bool converged;
};

/// log Gamma(x) for x > 0.
double log_gamma(double x);

/// log B(a, b) for a, b > 0.
double log_beta(double a, double b);

/// Integrates exp(fn) over (lo, hi) with adaptive Gauss-Kronrod in the log
/// domain: only ratios exp(fn - local max) are ever exponentiated, so
/// integrands peaking at e^±1000 are fine. Infinite endpoints are mapped to
/// (0,1) by a monotone rational substitution. Endpoints are never sampled.
LogIntegral integrate_log(const std::function<double(double)>& fn, double lo, double hi,
                          const QuadratureSpec& spec = {});

/// Gauss hypergeometric 2F1(a0, b0; c0; z) via the Euler integral,
/// valid for c0 > b0 > 0 and z <= 0.
LogValue gauss_2f1(double a0, double b0, double c0, double z, const QuadratureSpec& spec = {});

/// Appell F1(ap; b1p, b2p; cp; x, y) via its one-dimensional Euler integral,
/// valid for cp > ap > 0 and 0 <= x, y < 1 (b1p, b2p unrestricted).
/// Throws QuadratureError on hard non-convergence.
LogValue appell_f1(double ap, double b1p, double b2p, double cp, double x, double y,
                   const QuadratureSpec& spec = {});

/// Kummer confluent M(a, b, z) via the Euler integral, for b > a > 0, z <= 0.
LogValue kummer_m(double a, double b, double z, const QuadratureSpec& spec = {});

struct QuadratureError : std::runtime_error {
  double log_best;   // best available estimate
  double log_error;  // its error bound
  QuadratureError(const std::string& what, double best, double err)
      : std::runtime_error(what), log_best(best), log_error(err) {}
};

}  // namespace pep::specfun
