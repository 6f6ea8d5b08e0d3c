#include "pep/priors.hpp"

#include <algorithm>
#include <cmath>

namespace pep {

using specfun::log_beta;

std::string family_name(Family f) {
  switch (f) {
    case Family::PEP: return "pep";
    case Family::EPP: return "epp";
    case Family::Intrinsic: return "intrinsic";
    case Family::HyperG: return "hyper-g";
    case Family::HyperGN: return "hyper-gn";
    case Family::Robust: return "robust";
    case Family::Benchmark: return "benchmark";
    case Family::MG: return "mg";
    case Family::FixedG: return "g-prior";
  }
  return "?";
}

Family family_from_name(const std::string& name) {
  if (name == "pep") return Family::PEP;
  if (name == "epp") return Family::EPP;
  if (name == "intrinsic") return Family::Intrinsic;
  if (name == "hyper-g") return Family::HyperG;
  if (name == "hyper-gn") return Family::HyperGN;
  if (name == "robust") return Family::Robust;
  if (name == "benchmark") return Family::Benchmark;
  if (name == "mg") return Family::MG;
  if (name == "g-prior") return Family::FixedG;
  throw std::invalid_argument("unknown prior family '" + name + "'");
}

double PriorSpec::resolve_delta(int n, int k1) const {
  switch (family) {
    case Family::EPP: return 1.0;
    case Family::Intrinsic: return static_cast<double>(n) / (k1 + 1);
    default: return std::isnan(delta) ? static_cast<double>(n) : delta;
  }
}

int PriorSpec::resolve_n_star(int n, int k1) const {
  if (family == Family::Intrinsic) return k1 + 1;  // minimal training sample
  return n_star < 0 ? n : n_star;
}

double PriorSpec::resolve_g_fixed(int n) const {
  return std::isnan(g_fixed) ? static_cast<double>(n) : g_fixed;
}

SgbpParams mixing_params(const PriorSpec& spec, int k0, int k1, int n, int p_total) {
  switch (spec.family) {
    case Family::PEP:
    case Family::EPP:
    case Family::Intrinsic: {
      const int ns = spec.resolve_n_star(n, k1);
      const double dl = spec.resolve_delta(n, k1);
      if (ns < k1 + 1)
        throw std::invalid_argument("mixing_params: n_star must be at least k1+1");
      const double a = 0.5 * (ns + spec.d0 - k1);
      const double b = 0.5 * (ns + spec.d1 - spec.d0 - k1);
      if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("mixing_params: (d0, d1) incompatible with n_star, k1");
      return {a, b, 1.0, dl, dl};
    }
    case Family::HyperG: {
      const double a = 0.5 * spec.a_h - 1.0;
      if (!(a > 0.0)) throw std::invalid_argument("mixing_params: hyper-g requires a_h > 2");
      return {a, 1.0, 1.0, 1.0, 0.0};
    }
    case Family::HyperGN: {
      const double a = 0.5 * spec.a_h - 1.0;
      if (!(a > 0.0)) throw std::invalid_argument("mixing_params: hyper-g/n requires a_h > 2");
      return {a, 1.0, 1.0, static_cast<double>(n), 0.0};
    }
    case Family::Robust: {
      const double rho = std::isnan(spec.rho_1r) ? 1.0 / (k0 + k1) : spec.rho_1r;
      const double q = (spec.b_r + n) * rho;
      const double s = q - spec.b_r;
      if (!(spec.a_r > 0.0) || !(q > 0.0) || s < 0.0)
        throw std::invalid_argument("mixing_params: invalid robust parameters");
      return {spec.a_r, 1.0, 1.0, q, s};
    }
    case Family::Benchmark: {
      const double b = spec.c_b * std::max<double>(n, static_cast<double>(p_total) * p_total);
      return {spec.c_b, b, 1.0, 1.0, 0.0};
    }
    case Family::MG: {
      const double q_mg = std::isnan(spec.q_mg) ? static_cast<double>(p_total) : spec.q_mg;
      if (!(q_mg < n - 1))
        throw std::invalid_argument("mixing_params: MG prior requires q_mg < n-1");
      const double a = std::isnan(spec.a_mg) ? 0.25 : spec.a_mg + 1.0;
      const double b = std::isnan(spec.b_mg) ? 0.5 * (n - q_mg - 5.0) + 0.75 : spec.b_mg + 1.0;
      if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("mixing_params: invalid MG parameters");
      return {a, b, 1.0, 1.0, 0.0};
    }
    case Family::FixedG:
      throw DegenerateFamily("mixing_params: fixed-g has no mixing distribution");
  }
  throw std::logic_error("mixing_params: unreachable");
}

LogValue log_density_g(const SgbpParams& prm, double g) {
  if (g < prm.s) return LogValue::zero();
  const double z = (g - prm.s) / prm.q;
  double lf = std::log(prm.p) - std::log(prm.q) - log_beta(prm.a, prm.b);
  const double e1 = prm.b * prm.p - 1.0;
  if (e1 != 0.0 && z == 0.0) return e1 > 0.0 ? LogValue::zero() : LogValue::from_log(INFINITY);
  // for z > 1 write log1p(z^p) = p log z + log1p(z^-p) and combine the powers
  // of z into a single (negative) exponent, so z = inf stays inf-free
  if (z > 1.0) {
    lf += (e1 - (prm.a + prm.b) * prm.p) * std::log(z) -
          (prm.a + prm.b) * std::log1p(std::pow(z, -prm.p));
  } else {
    if (e1 != 0.0) lf += e1 * std::log(z);
    lf -= (prm.a + prm.b) * std::log1p(std::pow(z, prm.p));
  }
  return LogValue::from_log(lf);
}

double sample_g(const SgbpParams& prm, CounterRng& rng) {
  const double t = rng.beta(prm.a, prm.b);
  return prm.s + prm.q * std::pow((1.0 - t) / t, 1.0 / prm.p);
}

ShrinkagePriorSummary prior_w_moments(const SgbpParams& prm) {
  if (prm.p != 1.0 || prm.q != prm.s)
    throw std::invalid_argument("prior_w_moments: requires PEP-shaped params (p=1, q=s)");
  const double delta = prm.s;
  const double z = -1.0 / delta;
  ShrinkagePriorSummary out;
  out.mean_w = specfun::gauss_2f1(1.0, prm.a, prm.a + prm.b, z).value();
  const double m2 = specfun::gauss_2f1(2.0, prm.a, prm.a + prm.b, z).value();
  out.var_w = std::max(0.0, m2 - out.mean_w * out.mean_w);
  taylor_w_approx(prm.a, prm.b, delta, &out.mean_w_approx, &out.sd_w_approx);
  return out;
}

void taylor_w_approx(double a, double b, double delta, double* mean, double* sd) {
  if (!(a > 0.0) || !(b > 0.0) || !(delta > 0.0))
    throw std::invalid_argument("taylor_w_approx: requires a, b, delta > 0");
  const double mu = a / (a + b);
  const double var_t = a * b / ((a + b) * (a + b) * (a + b + 1.0));
  const double d = delta + mu;
  // w(t) = delta/(delta+t); w' = -delta/d^2; w'' = 2 delta/d^3
  *mean = delta / d + 0.5 * (2.0 * delta / (d * d * d)) * var_t;
  *sd = (delta / (d * d)) * std::sqrt(var_t);
}

double inverse_t_moment(double a, double b) {
  if (!(a > 1.0)) throw std::invalid_argument("inverse_t_moment: requires a > 1");
  return (a + b - 1.0) / (a - 1.0);
}

double log_density_g_zellner_siow(double g, int n) {
  if (!(g > 0.0)) return -INFINITY;
  const double shape = 0.5, scale = 0.5 * n;
  return shape * std::log(scale) - specfun::log_gamma(shape) - (shape + 1.0) * std::log(g) -
         scale / g;
}

}  // namespace pep
