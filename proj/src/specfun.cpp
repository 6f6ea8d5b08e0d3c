#include "pep/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace pep::specfun {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// 15-point Kronrod extension of the 7-point Gauss rule on [-1,1].
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

double log_sum(double la, double lb) {
  if (la == kNegInf) return lb;
  if (lb == kNegInf) return la;
  const double m = std::max(la, lb);
  return m + std::log(std::exp(la - m) + std::exp(lb - m));
}

struct Segment {
  double lo, hi;
  double log_integral;
  double log_error;
};

Segment evaluate_segment(const std::function<double(double)>& fn, double lo, double hi) {
  const double c = 0.5 * (lo + hi);
  const double h = 0.5 * (hi - lo);
  double f[15];
  int idx = 0;
  double fmax = kNegInf;
  for (int i = 0; i < 8; ++i) {
    const double xi = kXgk[i];
    f[idx] = fn(c - h * xi);
    if (std::isnan(f[idx])) f[idx] = kNegInf;  // node rounded onto a removable edge
    fmax = std::max(fmax, f[idx]);
    ++idx;
    if (xi != 0.0) {
      f[idx] = fn(c + h * xi);
      if (std::isnan(f[idx])) f[idx] = kNegInf;
      fmax = std::max(fmax, f[idx]);
      ++idx;
    }
  }
  Segment seg{lo, hi, kNegInf, kNegInf};
  if (fmax == kNegInf || !std::isfinite(fmax)) return seg;  // integrand vanishes here
  double sk = 0.0, sg = 0.0;
  idx = 0;
  for (int i = 0; i < 8; ++i) {
    const double xi = kXgk[i];
    sk += kWgk[i] * std::exp(f[idx] - fmax);
    if (i % 2 == 1) sg += kWg[i / 2] * std::exp(f[idx] - fmax);
    ++idx;
    if (xi != 0.0) {
      sk += kWgk[i] * std::exp(f[idx] - fmax);
      if (i % 2 == 1) sg += kWg[i / 2] * std::exp(f[idx] - fmax);
      ++idx;
    }
  }
  seg.log_integral = fmax + std::log(h * sk);
  const double diff = h * std::fabs(sk - sg);
  seg.log_error = diff > 0.0 ? fmax + std::log(diff) : seg.log_integral + std::log(1e-16);
  return seg;
}

LogIntegral adapt_01_domain(const std::function<double(double)>& fn, double lo, double hi,
                            const QuadratureSpec& spec) {
  std::vector<Segment> segs;
  segs.push_back(evaluate_segment(fn, lo, hi));
  // seed with a couple of splits so a narrow interior peak is not missed
  for (int k = 0; k < 3; ++k) {
    std::vector<Segment> next;
    for (const auto& s : segs) {
      const double m = 0.5 * (s.lo + s.hi);
      next.push_back(evaluate_segment(fn, s.lo, m));
      next.push_back(evaluate_segment(fn, m, s.hi));
    }
    segs = std::move(next);
  }
  int splits = static_cast<int>(segs.size());
  for (;;) {
    double total = kNegInf, err = kNegInf;
    for (const auto& s : segs) {
      total = log_sum(total, s.log_integral);
      err = log_sum(err, s.log_error);
    }
    const bool ok = err <= std::log(spec.abs_tol) || err <= total + std::log(spec.rel_tol);
    if (ok) return {total, err, true};
    if (splits >= spec.max_subdivisions) return {total, err, false};
    auto worst = std::max_element(segs.begin(), segs.end(), [](const Segment& a, const Segment& b) {
      return a.log_error < b.log_error;
    });
    const Segment s = *worst;
    const double m = 0.5 * (s.lo + s.hi);
    *worst = evaluate_segment(fn, s.lo, m);
    segs.push_back(evaluate_segment(fn, m, s.hi));
    ++splits;
  }
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("log_gamma: argument must be positive");
  return std::lgamma(x);
}

double log_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("log_beta: arguments must be positive");
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

LogIntegral integrate_log(const std::function<double(double)>& fn, double lo, double hi,
                          const QuadratureSpec& spec) {
  if (!(lo < hi)) throw std::invalid_argument("integrate_log: requires lo < hi");
  const bool lo_inf = std::isinf(lo);
  const bool hi_inf = std::isinf(hi);
  if (!lo_inf && !hi_inf) return adapt_01_domain(fn, lo, hi, spec);
  // one-sided maps use x = expm1(u/(1-u)): the exponential reach covers
  // heavy power-law tails that the rational map alone cannot represent
  if (!lo_inf && hi_inf) {
    auto g = [&fn, lo](double u) {
      const double om = 1.0 - u;
      if (om <= 0.0) return kNegInf;
      const double t = u / om;
      const double x = lo + std::expm1(t);
      if (!std::isfinite(x)) return kNegInf;
      return fn(x) + t - 2.0 * std::log(om);
    };
    return adapt_01_domain(g, 0.0, 1.0, spec);
  }
  if (lo_inf && !hi_inf) {
    auto g = [&fn, hi](double u) {
      const double om = 1.0 - u;
      if (om <= 0.0) return kNegInf;
      const double t = u / om;
      const double x = hi - std::expm1(t);
      if (!std::isfinite(x)) return kNegInf;
      return fn(x) + t - 2.0 * std::log(om);
    };
    return adapt_01_domain(g, 0.0, 1.0, spec);
  }
  auto g = [&fn](double u) {
    const double d = 1.0 - u * u;
    if (d <= 0.0) return kNegInf;
    return fn(u / d) + std::log((1.0 + u * u) / (d * d));
  };
  return adapt_01_domain(g, -1.0, 1.0, spec);
}

namespace {

// log of integral over (0,1) of t^{p-1} (1-t)^{q-1} exp(h(t)) dt with h finite
// on [0,1]. Tanh-sinh quadrature: the double-exponential node clustering
// absorbs the algebraic endpoint singularities at machine precision, which the
// adaptive Gauss-Kronrod rule cannot certify reliably.
LogIntegral beta_kernel_log(double p, double q, const std::function<double(double)>& h,
                            const QuadratureSpec& spec) {
  const double W = 6.5;
  auto node = [&](double w) {
    // t = 1/2 (1 + tanh((pi/2) sinh w)) = 1/(1 + e^{-B}), B = pi sinh w;
    // keep log t and log(1-t) exact near both endpoints
    const double B = M_PI * std::sinh(w);
    double log_t, log_1mt;
    if (B >= 0.0) {
      const double e = std::log1p(std::exp(-B));
      log_t = -e;
      log_1mt = -B - e;
    } else {
      const double e = std::log1p(std::exp(B));
      log_t = B - e;
      log_1mt = -e;
    }
    const double log_jac = log_t + log_1mt + std::log(M_PI * std::cosh(w));
    double f = (p - 1.0) * log_t + (q - 1.0) * log_1mt + log_jac + h(std::exp(log_t));
    if (std::isnan(f)) f = kNegInf;
    return f;
  };
  // trapezoid sums with successive step halving; the error of the
  // double-exponential rule collapses geometrically with each level
  double step = 1.0;
  double log_sum_all = kNegInf;
  for (double w = -W; w <= W + 1e-12; w += step) log_sum_all = log_sum(log_sum_all, node(w));
  double prev = log_sum_all + std::log(step);
  for (int level = 1; level <= 12; ++level) {
    step *= 0.5;
    for (double w = -W + step; w <= W; w += 2.0 * step)
      log_sum_all = log_sum(log_sum_all, node(w));
    const double cur = log_sum_all + std::log(step);
    const double change = std::fabs(cur - prev);
    prev = cur;
    // only the relative change counts: callers divide by Beta(p, q), which can
    // be as small as the integral itself, so absolute smallness proves nothing
    if (level >= 3 && change <= spec.rel_tol)
      return {cur, cur + std::log(std::max(change, 1e-300)), true};
  }
  return {prev, prev + std::log(spec.rel_tol), false};
}

}  // namespace

LogValue gauss_2f1(double a0, double b0, double c0, double z, const QuadratureSpec& spec) {
  if (!(c0 > b0) || !(b0 > 0.0))
    throw std::invalid_argument("gauss_2f1: requires c0 > b0 > 0");
  if (z > 0.0) throw std::invalid_argument("gauss_2f1: requires z <= 0");
  if (z == 0.0 || a0 == 0.0) return LogValue::from_log(0.0);
  auto h = [=](double x) { return -a0 * std::log1p(-z * x); };
  const LogIntegral li = beta_kernel_log(b0, c0 - b0, h, spec);
  if (!li.converged)
    throw QuadratureError("gauss_2f1: quadrature did not converge", li.log_value, li.log_error);
  return LogValue::from_log(li.log_value - log_beta(b0, c0 - b0));
}

LogValue appell_f1(double ap, double b1p, double b2p, double cp, double x, double y,
                   const QuadratureSpec& spec) {
  if (!(cp > ap) || !(ap > 0.0))
    throw std::invalid_argument("appell_f1: requires cp > ap > 0");
  if (x < 0.0 || x >= 1.0 || y < 0.0 || y >= 1.0)
    throw std::invalid_argument("appell_f1: requires x, y in [0,1)");
  const double lb = log_beta(ap, cp - ap);
  if (x > 1.0 - 1e-6 && b1p > 0.0) {
    // (1-xt)^{-b1p} develops an integrable near-singularity at t -> 1;
    // split at t = x and use t = 1 - e^{-v} on the tail.
    auto fn = [=](double t) {
      return (ap - 1.0) * std::log(t) + (cp - ap - 1.0) * std::log1p(-t) -
             b1p * std::log1p(-x * t) - b2p * std::log1p(-y * t);
    };
    const LogIntegral head = integrate_log(fn, 0.0, x, spec);
    // on the tail keep e^{-v} = 1 - t explicit: forming t first and taking
    // log1p(-t) hits the double-precision floor and stalls the error estimate
    auto tail_fn = [=](double v) {
      const double e = std::exp(-v);
      return (ap - 1.0) * std::log1p(-e) - (cp - ap - 1.0) * v -
             b1p * std::log((1.0 - x) + x * e) - b2p * std::log((1.0 - y) + y * e) - v;
    };
    const LogIntegral tail = integrate_log(tail_fn, -std::log1p(-x),
                                           std::numeric_limits<double>::infinity(), spec);
    if (!head.converged || !tail.converged) {
      const double best = log_sum(head.log_value, tail.log_value);
      throw QuadratureError("appell_f1: quadrature did not converge near singular edge", best,
                            log_sum(head.log_error, tail.log_error));
    }
    return LogValue::from_log(log_sum(head.log_value, tail.log_value) - lb);
  }
  auto h = [=](double t) { return -b1p * std::log1p(-x * t) - b2p * std::log1p(-y * t); };
  const LogIntegral li = beta_kernel_log(ap, cp - ap, h, spec);
  if (!li.converged)
    throw QuadratureError("appell_f1: quadrature did not converge", li.log_value, li.log_error);
  return LogValue::from_log(li.log_value - lb);
}

LogValue kummer_m(double a, double b, double z, const QuadratureSpec& spec) {
  if (!(b > a) || !(a > 0.0)) throw std::invalid_argument("kummer_m: requires b > a > 0");
  if (z > 0.0) throw std::invalid_argument("kummer_m: requires z <= 0");
  if (z == 0.0) return LogValue::from_log(0.0);
  auto h = [=](double t) { return z * t; };
  const LogIntegral li = beta_kernel_log(a, b - a, h, spec);
  if (!li.converged)
    throw QuadratureError("kummer_m: quadrature did not converge", li.log_value, li.log_error);
  return LogValue::from_log(li.log_value - log_beta(a, b - a));
}

}  // namespace pep::specfun
