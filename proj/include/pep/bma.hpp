#pragma once

#include "pep/samplers.hpp"

namespace pep {

/// New covariate rows, already centred with the training-sample means.
struct PredictionRequest {
  Eigen::MatrixXd X_new;
};

struct CvConfig {
  int folds = 8;
  std::uint64_t seed = 0;
};

enum class LpsEngine { Enumeration, Gibbs };

struct SeriesSummary {
  std::vector<double> series;  // one value per kept iteration
  double mean = 0.0;
};

struct LpsResult {
  std::vector<double> fold_scores;  // NaN for failed folds
  double mean = 0.0, sd = 0.0;
  std::vector<int> fold_of;  // fold index per observation, for audit
  std::vector<int> failed_folds;
};

/// E(g/(g+1) | y, M): the F1 ratio for the PEP shapes, the fixed point for
/// FixedG, a quadrature ratio otherwise. Returns 1 for the reference model.
double expected_w(const OlsStats& stats, const PriorSpec& spec, int p_total);

/// Model-averaged point prediction from an enumerated posterior: the common
/// intercept term plus posterior-probability- and shrinkage-weighted
/// least-squares fits. Requires centred training covariates.
Eigen::VectorXd bma_predict_closed(const PosteriorTable& table, const Dataset& ds,
                                   const PriorSpec& spec, const PredictionRequest& req);

/// Monte-Carlo average of the per-iteration linear predictions of a
/// full-parameter trace (excluded coefficients do not contribute).
Eigen::VectorXd bma_predict_mcmc(const ChainTrace& trace, const Dataset& ds,
                                 const PredictionRequest& req);

/// Per-iteration R^2 = 1 - sigma^2 / S_y^2 (unbiased sample variance of y).
SeriesSummary bma_r2(const ChainTrace& trace, const Dataset& ds);

/// Per-iteration root mean squared deviation between y and a draw from the
/// plugged-in predictive normal.
SeriesSummary bma_rmse(const ChainTrace& trace, const Dataset& ds, CounterRng& rng);

/// kappa-fold cross-validated mean negative log predictive density under
/// model averaging. Enumeration scores each point by the exact ratio of
/// augmented to training marginals; the Gibbs engine averages the normal
/// density over a posterior trace.
LpsResult bma_lps(const Dataset& ds, const PriorSpec& spec, ModelPrior model_prior,
                  const CvConfig& cv, LpsEngine engine,
                  const SamplerConfig* gibbs_cfg = nullptr);

}  // namespace pep
