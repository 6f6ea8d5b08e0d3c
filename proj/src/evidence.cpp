#include "pep/evidence.hpp"

#include <cmath>
#include <limits>

namespace pep {

using specfun::log_beta;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kR10Floor = 1e-300;

/// Laplace approximation of log ∫ exp(h(g)) dg over (s, ∞).
double laplace_log_integral(const std::function<double(double)>& h, double s, double scale) {
  double best_g = s + scale, best_h = -kInf;
  for (int i = 0; i <= 400; ++i) {
    const double g = s + scale * std::exp(-8.0 + 16.0 * i / 400.0);
    const double v = h(g);
    if (v > best_h) {
      best_h = v;
      best_g = g;
    }
  }
  // golden-section refinement around the grid maximum
  double lo = std::max(s, best_g / 2.0), hi = best_g * 2.0;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = h(x1), f2 = h(x2);
  for (int it = 0; it < 120 && hi - lo > 1e-10 * best_g; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = h(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = h(x1);
    }
  }
  const double ghat = 0.5 * (lo + hi);
  const double hhat = h(ghat);
  const double step = std::max(1e-5 * ghat, 1e-8);
  const double d2 = (h(ghat + step) - 2.0 * hhat + h(ghat - step)) / (step * step);
  if (!(d2 < 0.0)) return hhat + std::log(scale);  // flat mode; crude width guess
  return hhat + 0.5 * std::log(2.0 * M_PI / (-d2));
}

}  // namespace

std::string evidence_method_name(EvidenceMethod m) {
  switch (m) {
    case EvidenceMethod::ClosedFormF1: return "closed_form_f1";
    case EvidenceMethod::ConditionalFixedG: return "conditional_fixed_g";
    case EvidenceMethod::Quadrature: return "quadrature";
    case EvidenceMethod::Laplace: return "laplace";
  }
  return "?";
}

double log_ml_given_g(const OlsStats& stats, double g, double d0) {
  const double e1 = 0.5 * (stats.n + d0 - stats.k1);
  const double e0 = 0.5 * (stats.n + d0 - stats.k0);
  return e1 * std::log1p(g) - e0 * std::log1p(g * stats.r10);
}

EvidenceResult log_ml_pep_closed(const OlsStats& stats, const PriorSpec& spec) {
  if (spec.family != Family::PEP && spec.family != Family::EPP &&
      spec.family != Family::Intrinsic)
    throw std::invalid_argument("log_ml_pep_closed: family must be PEP, EPP or Intrinsic");
  const int ke = stats.ke();
  if (ke == 0) return {0.0, EvidenceMethod::ClosedFormF1, 0.0};

  const double n = stats.n, d0 = spec.d0;
  if (!(n + d0 - stats.k0 > 0.0))
    throw std::invalid_argument("log_ml_pep_closed: requires n + d0 - k0 > 0");
  const SgbpParams prm = mixing_params(spec, stats.k0, stats.k1, stats.n, 0);
  const double delta = prm.s;
  const double a = prm.a, b = prm.b;

  double r10 = stats.r10;
  if (r10 < kR10Floor) r10 = kR10Floor;
  const double x = 1.0 / (1.0 + delta * r10);
  const double y = 1.0 / (delta + 1.0);
  if (x >= 1.0) {
    // perfect fit: the evidence diverges (information consistency)
    return {kInf, EvidenceMethod::ClosedFormF1, kInf};
  }

  const double e1 = 0.5 * (n + d0 - stats.k1);
  const double e0 = 0.5 * (n + d0 - stats.k0);
  const double base = log_beta(0.5 * ke + a, b) - log_beta(a, b) + e1 * std::log1p(delta) -
                      e0 * std::log1p(delta * r10);
  try {
    const LogValue f1 = specfun::appell_f1(b, e0, -e1, 0.5 * ke + a + b, x, y);
    return {base + f1.log_magnitude, EvidenceMethod::ClosedFormF1, 0.0};
  } catch (const specfun::QuadratureError& e) {
    auto h = [&](double g) {
      return log_ml_given_g(stats, g, d0) + log_density_g(prm, g).log_magnitude;
    };
    const double lv = laplace_log_integral(h, prm.s, prm.q);
    return {lv, EvidenceMethod::Laplace, e.log_error};
  }
}

EvidenceResult log_ml_quadrature(const OlsStats& stats, const PriorSpec& spec, int p_total) {
  if (spec.family == Family::FixedG)
    throw DegenerateFamily("log_ml_quadrature: fixed-g evidence is conditional; use log_ml_given_g");
  const int ke = stats.ke();
  if (ke == 0) return {0.0, EvidenceMethod::Quadrature, 0.0};
  const SgbpParams prm = mixing_params(spec, stats.k0, stats.k1, stats.n, p_total);
  auto fn = [&](double g) {
    const LogValue d = log_density_g(prm, g);
    if (d.is_zero()) return -kInf;
    return log_ml_given_g(stats, g, spec.d0) + d.log_magnitude;
  };
  const specfun::LogIntegral li = specfun::integrate_log(fn, prm.s, kInf);
  if (!li.converged)
    throw specfun::QuadratureError("log_ml_quadrature: non-convergence", li.log_value,
                                   li.log_error);
  return {li.log_value, EvidenceMethod::Quadrature, li.log_error};
}

EvidenceResult log_ml_quadrature_custom(const OlsStats& stats, double d0,
                                        const std::function<double(double)>& log_prior_g,
                                        double lo, double hi) {
  if (stats.ke() == 0) return {0.0, EvidenceMethod::Quadrature, 0.0};
  auto fn = [&](double g) { return log_ml_given_g(stats, g, d0) + log_prior_g(g); };
  const specfun::LogIntegral li = specfun::integrate_log(fn, lo, hi);
  if (!li.converged)
    throw specfun::QuadratureError("log_ml_quadrature_custom: non-convergence", li.log_value,
                                   li.log_error);
  return {li.log_value, EvidenceMethod::Quadrature, li.log_error};
}

EvidenceResult log_ml(const OlsStats& stats, const PriorSpec& spec, int p_total) {
  switch (spec.family) {
    case Family::PEP:
    case Family::EPP:
    case Family::Intrinsic:
      return log_ml_pep_closed(stats, spec);
    case Family::FixedG:
      return {log_ml_given_g(stats, spec.resolve_g_fixed(stats.n), spec.d0),
              EvidenceMethod::ConditionalFixedG, 0.0};
    default:
      return log_ml_quadrature(stats, spec, p_total);
  }
}

double log_bayes_factor(const OlsStats& stats1, const OlsStats& stats2, const PriorSpec& spec,
                        int p_total) {
  if (stats1.n != stats2.n || stats1.k0 != stats2.k0)
    throw std::invalid_argument("log_bayes_factor: models must share dataset and reference");
  return log_ml(stats1, spec, p_total).log_bf_vs_ref - log_ml(stats2, spec, p_total).log_bf_vs_ref;
}

double log_ml_reference(const Dataset& ds, double d0, const std::vector<int>& reference_cols) {
  const ModelMatrices mm = model_matrices(ds, ModelId::none(ds.p()), reference_cols);
  const int n = ds.n();
  const int k0 = mm.k0();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(mm.X0);
  const double rss0 = (ds.y - mm.X0 * qr.solve(ds.y)).squaredNorm();
  const double logdet = Eigen::LLT<Eigen::MatrixXd>(mm.X0.transpose() * mm.X0)
                            .matrixL()
                            .toDenseMatrix()
                            .diagonal()
                            .array()
                            .log()
                            .sum() *
                        2.0;
  const double nu = 0.5 * (n + d0 - k0);
  return -0.5 * (n - k0) * std::log(2.0 * M_PI) - 0.5 * logdet + specfun::log_gamma(nu) +
         nu * (std::log(2.0) - std::log(rss0)) - std::log(2.0);
}

}  // namespace pep
