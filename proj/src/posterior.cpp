#include "pep/posterior.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace pep {

using specfun::log_beta;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct F1Args {
  double a, b, delta, e0, e1, x, y;
  int ke;
};

F1Args f1_args(const OlsStats& stats, const PriorSpec& spec) {
  if (stats.ke() == 0)
    throw std::invalid_argument("posterior: model must extend the reference (ke > 0)");
  const SgbpParams prm = mixing_params(spec, stats.k0, stats.k1, stats.n, 0);
  if (prm.p != 1.0 || prm.q != prm.s)
    throw std::invalid_argument("posterior: requires a PEP-shaped family");
  F1Args fa;
  fa.a = prm.a;
  fa.b = prm.b;
  fa.delta = prm.s;
  fa.e1 = 0.5 * (stats.n + spec.d0 - stats.k1);
  fa.e0 = 0.5 * (stats.n + spec.d0 - stats.k0);
  fa.x = 1.0 / (1.0 + fa.delta * std::max(stats.r10, 1e-300));
  fa.y = 1.0 / (fa.delta + 1.0);
  fa.ke = stats.ke();
  return fa;
}

}  // namespace

ModelContext ModelContext::build(const Dataset& ds, const ModelId& m,
                                 const std::vector<int>& reference_cols) {
  ModelContext ctx;
  ctx.y = ds.y;
  ctx.mm = model_matrices(ds, m, reference_cols);
  ctx.stats = ols_stats(ds, m, reference_cols);
  ctx.XtX0 = ctx.mm.X0.transpose() * ctx.mm.X0;
  ctx.XtXe = ctx.mm.Xe.transpose() * ctx.mm.Xe;
  ctx.X0tXe = ctx.mm.X0.transpose() * ctx.mm.Xe;
  ctx.beta0_hat = ctx.XtX0.llt().solve(ctx.mm.X0.transpose() * ds.y);
  return ctx;
}

ConditionalBetaE cond_beta_e(const ModelContext& ctx, const Eigen::VectorXd& beta0, double sigma2,
                             double g) {
  if (!(g > 0.0) || !(sigma2 > 0.0))
    throw std::invalid_argument("cond_beta_e: requires g > 0, sigma2 > 0");
  const double w = g / (g + 1.0);
  const Eigen::MatrixXd A = w * ctx.XtXe + (1.0 - w) * ctx.mm.Ve_inv;
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) throw std::runtime_error("cond_beta_e: singular system");
  ConditionalBetaE out;
  out.shrink_w = w;
  out.mean = llt.solve(w * (ctx.mm.Xe.transpose() * (ctx.y - ctx.mm.X0 * beta0)));
  out.cov = sigma2 * w * llt.solve(Eigen::MatrixXd::Identity(ctx.mm.ke(), ctx.mm.ke()));
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  return out;
}

void cond_beta_0(const ModelContext& ctx, const Eigen::VectorXd& beta_e, double sigma2,
                 Eigen::VectorXd* mean, Eigen::MatrixXd* cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(ctx.XtX0);
  if (llt.info() != Eigen::Success) throw std::runtime_error("cond_beta_0: singular X0'X0");
  *mean = ctx.beta0_hat - llt.solve(ctx.X0tXe * beta_e);
  *cov = sigma2 * llt.solve(Eigen::MatrixXd::Identity(ctx.mm.k0(), ctx.mm.k0()));
}

void cond_sigma2(const ModelContext& ctx, const Eigen::VectorXd& beta0,
                 const Eigen::VectorXd& beta_e, double g, double d0, double* shape, double* rate,
                 bool printed_variant) {
  if (!(g > 0.0)) throw std::invalid_argument("cond_sigma2: requires g > 0");
  *shape = 0.5 * (ctx.stats.n + ctx.mm.ke() + d0);
  const double penalty =
      ctx.mm.ke() > 0 ? beta_e.dot(ctx.mm.Ve_inv * beta_e) : 0.0;
  if (printed_variant) {
    *rate = 0.5 * (ctx.stats.rss + penalty);
    return;
  }
  Eigen::VectorXd resid = ctx.y - ctx.mm.X0 * beta0;
  if (ctx.mm.ke() > 0) resid -= ctx.mm.Xe * beta_e;
  *rate = 0.5 * (resid.squaredNorm() + penalty / g);
}

ChParams cond_u_ch(const ModelContext& ctx, const Eigen::VectorXd& beta_e, double sigma2,
                   const PriorSpec& spec, bool printed_variant) {
  const SgbpParams prm = mixing_params(spec, ctx.stats.k0, ctx.stats.k1, ctx.stats.n, 0);
  if (prm.p != 1.0 || prm.q != prm.s)
    throw std::invalid_argument("cond_u_ch: requires a PEP-shaped family");
  const double delta = prm.s;
  const double quad = beta_e.dot(ctx.mm.Ve_inv * beta_e);
  ChParams ch;
  ch.p = prm.b;
  ch.q = prm.a + 0.5 * ctx.mm.ke() + (printed_variant ? 2.0 : 0.0);
  ch.s = -quad / (2.0 * delta * sigma2);
  return ch;
}

void cond_beta_joint(const ModelContext& ctx, double sigma2, double g, Eigen::VectorXd* mean,
                     Eigen::MatrixXd* cov) {
  if (!(g > 0.0) || !(sigma2 > 0.0))
    throw std::invalid_argument("cond_beta_joint: requires g > 0, sigma2 > 0");
  const int k0 = ctx.mm.k0(), ke = ctx.mm.ke(), k1 = k0 + ke;
  const double w = g / (g + 1.0);
  Eigen::MatrixXd XtX1(k1, k1);
  XtX1.topLeftCorner(k0, k0) = ctx.XtX0;
  XtX1.topRightCorner(k0, ke) = ctx.X0tXe;
  XtX1.bottomLeftCorner(ke, k0) = ctx.X0tXe.transpose();
  XtX1.bottomRightCorner(ke, ke) = ctx.XtXe;
  Eigen::MatrixXd A = w * XtX1;
  if (ke > 0) A.bottomRightCorner(ke, ke) += (1.0 - w) * ctx.mm.Ve_inv;
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) throw std::runtime_error("cond_beta_joint: singular system");
  Eigen::VectorXd Xty(k1);
  Xty.head(k0) = ctx.mm.X0.transpose() * ctx.y;
  if (ke > 0) Xty.tail(ke) = ctx.mm.Xe.transpose() * ctx.y;
  *mean = llt.solve(w * Xty);
  *cov = sigma2 * w * llt.solve(Eigen::MatrixXd::Identity(k1, k1));
  *cov = 0.5 * (*cov + cov->transpose());
}

LogValue marginal_posterior_g(const OlsStats& stats, const PriorSpec& spec, double g) {
  const F1Args fa = f1_args(stats, spec);
  if (g < fa.delta) return LogValue::zero();
  const LogValue f1 =
      specfun::appell_f1(fa.b, fa.e0, -fa.e1, 0.5 * fa.ke + fa.a + fa.b, fa.x, fa.y);
  const double log_c2 = fa.a * std::log(fa.delta) - fa.e1 * std::log1p(fa.delta) +
                        fa.e0 * std::log1p(fa.delta * stats.r10) -
                        log_beta(fa.b, 0.5 * fa.ke + fa.a) - f1.log_magnitude;
  double lf = log_c2 + fa.e1 * std::log1p(g) - fa.e0 * std::log1p(g * stats.r10) -
              (fa.a + fa.b) * std::log(g);
  if (fa.b != 1.0) {
    if (g == fa.delta) return fa.b > 1.0 ? LogValue::zero() : LogValue::from_log(INFINITY);
    lf += (fa.b - 1.0) * std::log(g - fa.delta);
  }
  return LogValue::from_log(lf);
}

double posterior_g_moment(const OlsStats& stats, const PriorSpec& spec, int kappa) {
  if (kappa == 0) return 1.0;
  const F1Args fa = f1_args(stats, spec);
  if (!(0.5 * fa.ke + fa.a > kappa))
    throw std::invalid_argument("posterior_g_moment: moment does not exist (ke/2 + a <= kappa)");
  const double cp = 0.5 * fa.ke + fa.a + fa.b;
  const LogValue f1_0 = specfun::appell_f1(fa.b, fa.e0, -fa.e1, cp, fa.x, fa.y);
  const LogValue f1_k = specfun::appell_f1(fa.b, fa.e0, -fa.e1, cp - kappa, fa.x, fa.y);
  const double lr = kappa * std::log(fa.delta) + log_beta(fa.b, 0.5 * fa.ke + fa.a - kappa) -
                    log_beta(fa.b, 0.5 * fa.ke + fa.a) + f1_k.log_magnitude - f1_0.log_magnitude;
  return std::exp(lr);
}

double posterior_w_moment(const OlsStats& stats, const PriorSpec& spec, int kappa) {
  if (kappa == 0) return 1.0;
  const F1Args fa = f1_args(stats, spec);
  const double cp = 0.5 * fa.ke + fa.a + fa.b;
  const LogValue f1_0 = specfun::appell_f1(fa.b, fa.e0, -fa.e1, cp, fa.x, fa.y);
  const LogValue f1_k = specfun::appell_f1(fa.b, fa.e0, -fa.e1 + kappa, cp, fa.x, fa.y);
  const double lr = kappa * (std::log(fa.delta) - std::log1p(fa.delta)) + f1_k.log_magnitude -
                    f1_0.log_magnitude;
  return std::exp(lr);
}

GPosteriorSummary g_posterior_summary(const OlsStats& stats, const PriorSpec& spec) {
  const F1Args fa = f1_args(stats, spec);
  GPosteriorSummary out{};
  out.moment_exists_up_to = static_cast<int>(std::ceil(0.5 * fa.ke + fa.a)) - 1;
  out.mean_g = out.moment_exists_up_to >= 1 ? posterior_g_moment(stats, spec, 1) : INFINITY;
  out.var_g = out.moment_exists_up_to >= 2
                  ? posterior_g_moment(stats, spec, 2) - out.mean_g * out.mean_g
                  : INFINITY;
  out.mean_w = posterior_w_moment(stats, spec, 1);
  out.var_w = std::max(0.0, posterior_w_moment(stats, spec, 2) - out.mean_w * out.mean_w);
  return out;
}

double sample_grid_log_density(const std::function<double(double)>& log_density, double lo,
                               double hi, int grid, CounterRng& rng) {
  std::vector<double> lw(grid);
  const double h = (hi - lo) / grid;
  double m = kNegInf;
  for (int i = 0; i < grid; ++i) {
    lw[i] = log_density(lo + (i + 0.5) * h);
    if (lw[i] > m) m = lw[i];
  }
  if (m == kNegInf) throw std::runtime_error("sample_grid_log_density: density vanishes on grid");
  std::vector<double> cdf(grid);
  double acc = 0.0;
  for (int i = 0; i < grid; ++i) {
    acc += std::exp(lw[i] - m);
    cdf[i] = acc;
  }
  const double u = rng.uniform() * acc;
  int idx = static_cast<int>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
  if (idx >= grid) idx = grid - 1;
  const double prev = idx > 0 ? cdf[idx - 1] : 0.0;
  const double frac = (u - prev) / std::max(cdf[idx] - prev, 1e-300);
  return lo + (idx + frac) * h;
}

double sample_ch(const ChParams& ch, CounterRng& rng) {
  const int grid = std::fabs(ch.s) > 1e3 ? 16384 : 2048;
  auto ld = [&](double x) {
    return (ch.p - 1.0) * std::log(x) + (ch.q - 1.0) * std::log1p(-x) - ch.s * x;
  };
  return sample_grid_log_density(ld, 0.0, 1.0, grid, rng);
}

double sample_posterior_g(const OlsStats& stats, const PriorSpec& spec, CounterRng& rng) {
  const F1Args fa = f1_args(stats, spec);
  const double delta = fa.delta;
  // v = delta/g in (0,1]; unnormalized log density with the Jacobian delta/v^2
  auto ld = [&](double v) {
    const double g = delta / v;
    double lf = fa.e1 * std::log1p(g) - fa.e0 * std::log1p(g * stats.r10) -
                (fa.a + fa.b) * std::log(g) - 2.0 * std::log(v);
    if (fa.b != 1.0) {
      const double gm = g - delta;
      if (gm <= 0.0) return fa.b > 1.0 ? kNegInf : INFINITY;
      lf += (fa.b - 1.0) * std::log(gm);
    }
    return lf;
  };
  const double v = sample_grid_log_density(ld, 0.0, 1.0, 2048, rng);
  return delta / v;
}

}  // namespace pep
