#include "pep/bma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pep {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double sample_variance(const Eigen::VectorXd& y) {
  const double m = y.mean();
  return (y.array() - m).square().sum() / (y.size() - 1);
}

double logsumexp(const std::vector<double>& v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

/// Linear prediction of one trace state at one covariate row; excluded slots
/// carry pseudoprior draws and must not contribute.
double state_prediction(const ChainState& st, int k0, const Eigen::RowVectorXd& x) {
  double v = st.beta[0];  // intercept; extra reference columns unsupported here
  if (k0 != 1) throw std::invalid_argument("bma: only the intercept reference is supported");
  for (int j = 0; j < st.gamma.p; ++j)
    if (st.gamma.includes(j)) v += x[j] * st.beta[k0 + j];
  return v;
}

}  // namespace

double expected_w(const OlsStats& stats, const PriorSpec& spec, int p_total) {
  if (stats.ke() == 0) return 1.0;
  switch (spec.family) {
    case Family::PEP:
    case Family::EPP:
    case Family::Intrinsic:
      return posterior_w_moment(stats, spec, 1);
    case Family::FixedG: {
      const double g = spec.resolve_g_fixed(stats.n);
      return g / (g + 1.0);
    }
    default: {
      const SgbpParams prm = mixing_params(spec, stats.k0, stats.k1, stats.n, p_total);
      auto base = [&](double g) {
        const LogValue d = log_density_g(prm, g);
        if (d.is_zero()) return kNegInf;
        return log_ml_given_g(stats, g, spec.d0) + d.log_magnitude;
      };
      const double inf = std::numeric_limits<double>::infinity();
      const auto den = specfun::integrate_log(base, prm.s, inf);
      const auto num = specfun::integrate_log(
          [&](double g) { return base(g) + std::log(g) - std::log1p(g); }, prm.s, inf);
      return std::exp(num.log_value - den.log_value);
    }
  }
}

Eigen::VectorXd bma_predict_closed(const PosteriorTable& table, const Dataset& ds,
                                   const PriorSpec& spec, const PredictionRequest& req) {
  if (!ds.centred) throw std::invalid_argument("bma_predict_closed: covariates must be centred");
  if (req.X_new.cols() != ds.p())
    throw std::invalid_argument("bma_predict_closed: new rows have wrong width");
  const int p = ds.p();
  Eigen::VectorXd yhat = Eigen::VectorXd::Constant(req.X_new.rows(), ds.y.mean());
  for (const auto& rec : table.records) {
    const double prob = std::exp(rec.log_post);
    if (prob < 1e-14 || rec.model.bits == 0) continue;
    const OlsStats stats = ols_stats(ds, rec.model);
    const double w = expected_w(stats, spec, p);
    Eigen::VectorXd contrib = Eigen::VectorXd::Zero(req.X_new.rows());
    for (int j = 0, r = 0; j < p; ++j)
      if (rec.model.includes(j)) contrib += req.X_new.col(j) * stats.beta_hat[stats.k0 + r++];
    yhat += prob * w * contrib;
  }
  return yhat;
}

Eigen::VectorXd bma_predict_mcmc(const ChainTrace& trace, const Dataset& ds,
                                 const PredictionRequest& req) {
  if (!trace.has_beta)
    throw std::invalid_argument("bma_predict_mcmc: trace carries no coefficient draws");
  if (trace.states.empty()) throw std::invalid_argument("bma_predict_mcmc: empty trace");
  if (req.X_new.cols() != ds.p())
    throw std::invalid_argument("bma_predict_mcmc: new rows have wrong width");
  Eigen::VectorXd yhat = Eigen::VectorXd::Zero(req.X_new.rows());
  for (const auto& st : trace.states)
    for (int i = 0; i < req.X_new.rows(); ++i)
      yhat[i] += state_prediction(st, trace.k0, req.X_new.row(i));
  return yhat / static_cast<double>(trace.states.size());
}

SeriesSummary bma_r2(const ChainTrace& trace, const Dataset& ds) {
  if (trace.states.empty()) throw std::invalid_argument("bma_r2: empty trace");
  const double sy2 = sample_variance(ds.y);
  SeriesSummary out;
  out.series.reserve(trace.states.size());
  for (const auto& st : trace.states) {
    if (!std::isfinite(st.sigma2)) throw std::invalid_argument("bma_r2: trace lacks sigma^2");
    out.series.push_back(1.0 - st.sigma2 / sy2);
  }
  out.mean = std::accumulate(out.series.begin(), out.series.end(), 0.0) / out.series.size();
  return out;
}

SeriesSummary bma_rmse(const ChainTrace& trace, const Dataset& ds, CounterRng& rng) {
  if (!trace.has_beta) throw std::invalid_argument("bma_rmse: trace carries no coefficient draws");
  if (trace.states.empty()) throw std::invalid_argument("bma_rmse: empty trace");
  const int n = ds.n();
  SeriesSummary out;
  out.series.reserve(trace.states.size());
  for (const auto& st : trace.states) {
    if (!std::isfinite(st.sigma2)) throw std::invalid_argument("bma_rmse: trace lacks sigma^2");
    const double sd = std::sqrt(st.sigma2);
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
      const double pred = state_prediction(st, trace.k0, ds.X.row(i)) + sd * rng.normal();
      const double d = ds.y[i] - pred;
      ss += d * d;
    }
    out.series.push_back(std::sqrt(ss / n));
  }
  out.mean = std::accumulate(out.series.begin(), out.series.end(), 0.0) / out.series.size();
  return out;
}

namespace {

Dataset subset_rows(const Dataset& ds, const std::vector<int>& rows) {
  Dataset out;
  out.names = ds.names;
  out.y.resize(rows.size());
  out.X.resize(rows.size(), ds.p());
  for (size_t i = 0; i < rows.size(); ++i) {
    out.y[static_cast<int>(i)] = ds.y[rows[i]];
    out.X.row(static_cast<int>(i)) = ds.X.row(rows[i]);
  }
  return out;
}

Dataset append_row(const Dataset& ds, const Eigen::RowVectorXd& x, double y) {
  Dataset out = ds;
  out.y.conservativeResize(ds.n() + 1);
  out.y[ds.n()] = y;
  out.X.conservativeResize(ds.n() + 1, Eigen::NoChange);
  out.X.row(ds.n()) = x;
  return out;
}

double score_point_enumeration(const Dataset& train, const PosteriorTable& table_train,
                               double log_ref_train, const PriorSpec& spec, ModelPrior mp,
                               const Eigen::RowVectorXd& x, double y) {
  const Dataset aug = append_row(train, x, y);
  EnumerateOptions opts;
  opts.model_prior = mp;
  const PosteriorTable table_aug = enumerate_models(aug, spec, opts);
  const double log_ref_aug = log_ml_reference(aug, spec.d0);
  std::vector<double> terms(table_train.records.size());
  for (size_t t = 0; t < terms.size(); ++t) {
    // predictive density of the point under model t = augmented marginal /
    // training marginal, weighted by the training posterior
    terms[t] = table_train.records[t].log_post + (log_ref_aug + table_aug.records[t].log_evidence) -
               (log_ref_train + table_train.records[t].log_evidence);
  }
  return logsumexp(terms);
}

double score_point_gibbs(const ChainTrace& trace, const Eigen::RowVectorXd& x, double y) {
  std::vector<double> terms;
  terms.reserve(trace.states.size());
  for (const auto& st : trace.states) {
    const double mu = state_prediction(st, trace.k0, x);
    const double z = (y - mu) * (y - mu) / st.sigma2;
    terms.push_back(-0.5 * std::log(2.0 * M_PI * st.sigma2) - 0.5 * z);
  }
  return logsumexp(terms) - std::log(static_cast<double>(terms.size()));
}

}  // namespace

LpsResult bma_lps(const Dataset& ds, const PriorSpec& spec, ModelPrior model_prior,
                  const CvConfig& cv, LpsEngine engine, const SamplerConfig* gibbs_cfg) {
  const int n = ds.n();
  if (cv.folds < 2 || cv.folds > n)
    throw std::invalid_argument("bma_lps: folds must be in [2, n]");

  // seeded permutation, then near-equal contiguous blocks
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  CounterRng rng(cv.seed, 17);
  for (int i = n - 1; i > 0; --i) {
    const int j = std::min(i, static_cast<int>(rng.uniform() * (i + 1)));
    std::swap(perm[i], perm[j]);
  }
  LpsResult out;
  out.fold_of.assign(n, 0);
  const int base = n / cv.folds, extra = n % cv.folds;
  int pos = 0;
  std::vector<std::vector<int>> folds(cv.folds);
  for (int f = 0; f < cv.folds; ++f) {
    const int len = base + (f < extra ? 1 : 0);
    for (int i = 0; i < len; ++i) {
      folds[f].push_back(perm[pos]);
      out.fold_of[perm[pos]] = f;
      ++pos;
    }
  }

  out.fold_scores.assign(cv.folds, std::nan(""));
  for (int f = 0; f < cv.folds; ++f) {
    std::vector<int> train_rows;
    for (int g = 0; g < cv.folds; ++g)
      if (g != f) train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
    std::sort(train_rows.begin(), train_rows.end());
    const Dataset train = subset_rows(ds, train_rows);
    try {
      double acc = 0.0;
      if (engine == LpsEngine::Enumeration) {
        EnumerateOptions opts;
        opts.model_prior = model_prior;
        const PosteriorTable table = enumerate_models(train, spec, opts);
        const double log_ref = log_ml_reference(train, spec.d0);
        for (int i : folds[f])
          acc -= score_point_enumeration(train, table, log_ref, spec, model_prior, ds.X.row(i),
                                         ds.y[i]);
      } else {
        SamplerConfig cfg = gibbs_cfg ? *gibbs_cfg : SamplerConfig{};
        cfg.algorithm = Algorithm::GibbsVS;
        cfg.seed = cfg.seed ^ (0x9e3779b97f4a7c15ULL * (f + 1));
        cfg.model_prior = model_prior;
        const ChainTrace trace = run_gibbs_vs(train, spec, cfg);
        for (int i : folds[f]) acc -= score_point_gibbs(trace, ds.X.row(i), ds.y[i]);
      }
      out.fold_scores[f] = acc / folds[f].size();
    } catch (const std::exception&) {
      out.failed_folds.push_back(f);
    }
  }

  double s = 0.0;
  int k = 0;
  for (double v : out.fold_scores)
    if (std::isfinite(v)) {
      s += v;
      ++k;
    }
  if (k == 0) throw std::runtime_error("bma_lps: every fold failed");
  out.mean = s / k;
  double ss = 0.0;
  for (double v : out.fold_scores)
    if (std::isfinite(v)) ss += (v - out.mean) * (v - out.mean);
  out.sd = k > 1 ? std::sqrt(ss / (k - 1)) : 0.0;
  return out;
}

}  // namespace pep
