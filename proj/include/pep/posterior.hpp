#pragma once

#include <Eigen/Dense>
#include <functional>

#include "pep/dataset.hpp"
#include "pep/evidence.hpp"
#include "pep/priors.hpp"

namespace pep {

/// Everything the full conditionals need about one model, built once.
struct ModelContext {
  Eigen::VectorXd y;
  ModelMatrices mm;
  OlsStats stats;
  Eigen::MatrixXd XtX0;       // X0^T X0
  Eigen::MatrixXd XtXe;       // Xe^T Xe
  Eigen::MatrixXd X0tXe;      // X0^T Xe
  Eigen::VectorXd beta0_hat;  // OLS fit of the reference design alone

  static ModelContext build(const Dataset& ds, const ModelId& m,
                            const std::vector<int>& reference_cols = {});
};

struct ConditionalBetaE {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double shrink_w;  // g/(g+1)
};

/// beta_e | g, sigma^2, beta_0, y: normal with the multivariate shrinkage
/// matrix W_e = (w Xe'Xe + (1-w) Ve^-1)^-1 (w Xe'Xe).
ConditionalBetaE cond_beta_e(const ModelContext& ctx, const Eigen::VectorXd& beta0, double sigma2,
                             double g);

/// beta_0 | beta_e, sigma^2, y: normal around beta0_hat offset by the
/// cross-projection of beta_e.
void cond_beta_0(const ModelContext& ctx, const Eigen::VectorXd& beta_e, double sigma2,
                 Eigen::VectorXd* mean, Eigen::MatrixXd* cov);

/// sigma^2 | beta, g, y: inverse gamma. The rate divides the Ve^-1 penalty by
/// g and uses the residual sum at the conditioned beta; set printed_variant
/// to evaluate the article's typeset rate (MLE residuals, no 1/g) instead.
void cond_sigma2(const ModelContext& ctx, const Eigen::VectorXd& beta0,
                 const Eigen::VectorXd& beta_e, double g, double d0, double* shape, double* rate,
                 bool printed_variant = false);

struct ChParams {
  double p, q, s;  // density x^(p-1) (1-x)^(q-1) exp(-s x) on (0,1)
};

/// u | beta_e, sigma^2: confluent hypergeometric, with g = delta/(1-u).
/// The derived second parameter is a + ke/2; printed_variant adds the
/// article's typeset +2.
ChParams cond_u_ch(const ModelContext& ctx, const Eigen::VectorXd& beta_e, double sigma2,
                   const PriorSpec& spec, bool printed_variant = false);

/// beta_1 = (beta_0, beta_e) | sigma^2, g, y jointly: normal with
/// W_1 = (w X1'X1 + (1-w) T1)^-1 w X1'X1.
void cond_beta_joint(const ModelContext& ctx, double sigma2, double g, Eigen::VectorXd* mean,
                     Eigen::MatrixXd* cov);

/// Log density of g | y, M1 (normalized through F1); zero below delta.
LogValue marginal_posterior_g(const OlsStats& stats, const PriorSpec& spec, double g);

/// E(g^kappa | y, M1) via the Beta/F1 ratio; requires ke/2 + a > kappa.
double posterior_g_moment(const OlsStats& stats, const PriorSpec& spec, int kappa);

/// E(w^kappa | y, M1) = (delta/(delta+1))^kappa F1~(kappa)/F1~(0).
double posterior_w_moment(const OlsStats& stats, const PriorSpec& spec, int kappa);

struct GPosteriorSummary {
  double mean_g, var_g;
  double mean_w, var_w;
  int moment_exists_up_to;
};

GPosteriorSummary g_posterior_summary(const OlsStats& stats, const PriorSpec& spec);

/// Inverse-CDF draw from a log density tabulated on a uniform grid of (lo,hi).
double sample_grid_log_density(const std::function<double(double)>& log_density, double lo,
                               double hi, int grid, CounterRng& rng);

/// Draw from the CH conditional on (0,1); the grid is refined when the
/// exponential tilt is strong.
double sample_ch(const ChParams& ch, CounterRng& rng);

/// Draw g from its marginal posterior via the compactifying substitution
/// v = delta/g in (0,1].
double sample_posterior_g(const OlsStats& stats, const PriorSpec& spec, CounterRng& rng);

}  // namespace pep
