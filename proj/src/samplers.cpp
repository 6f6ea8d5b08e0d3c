#include "pep/samplers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <unordered_map>

namespace pep {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool pep_shaped(Family f) {
  return f == Family::PEP || f == Family::EPP || f == Family::Intrinsic;
}

long long kept_length(const SamplerConfig& cfg) {
  return (cfg.iterations - cfg.burnin + cfg.thin - 1) / cfg.thin;
}

void validate_config(const SamplerConfig& cfg) {
  if (cfg.iterations <= cfg.burnin || cfg.burnin < 0)
    throw std::invalid_argument("sampler: requires iterations > burnin >= 0");
  if (cfg.thin < 1) throw std::invalid_argument("sampler: thin must be >= 1");
}

ModelId initial_gamma(const Dataset& ds, const SamplerConfig& cfg) {
  if (cfg.has_initial_model) {
    if (cfg.initial_model.p != ds.p())
      throw std::invalid_argument("sampler: initial model has wrong width");
    return cfg.initial_model;
  }
  return ModelId::full(ds.p());
}

double initial_g(const Dataset& ds, const PriorSpec& spec, const ModelId& gamma,
                 const std::vector<int>& reference_cols) {
  const int k0 = 1 + static_cast<int>(reference_cols.size());
  const int k1 = k0 + gamma.dimension();
  if (spec.family == Family::FixedG) return spec.resolve_g_fixed(ds.n());
  if (spec.family == Family::Intrinsic) return 1.5 * spec.resolve_delta(ds.n(), k1);
  return static_cast<double>(ds.n());
}

/// Per-model cache of OLS statistics and (for GibbsVS) the design context.
struct ModelCache {
  const Dataset& ds;
  const std::vector<int>& reference_cols;
  bool want_context;
  std::unordered_map<std::uint64_t, OlsStats> stats;
  std::unordered_map<std::uint64_t, ModelContext> ctx;
  std::unordered_map<std::uint64_t, double> half_logdet_ve_inv;

  const OlsStats& get_stats(const ModelId& m) {
    auto it = stats.find(m.bits);
    if (it != stats.end()) return it->second;
    return stats.emplace(m.bits, ols_stats(ds, m, reference_cols)).first->second;
  }

  const ModelContext& get_ctx(const ModelId& m) {
    auto it = ctx.find(m.bits);
    if (it != ctx.end()) return it->second;
    ModelContext c = ModelContext::build(ds, m, reference_cols);
    double hld = 0.0;
    if (c.mm.ke() > 0) {
      Eigen::LLT<Eigen::MatrixXd> llt(c.mm.Ve_inv);
      if (llt.info() != Eigen::Success)
        throw std::runtime_error("sampler: singular Ve for model " + m.to_string());
      hld = llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    }
    half_logdet_ve_inv.emplace(m.bits, hld);
    return ctx.emplace(m.bits, std::move(c)).first->second;
  }

  double half_logdet(const ModelId& m) {
    get_ctx(m);
    return half_logdet_ve_inv.at(m.bits);
  }
};

double cached_log_evidence(EvidenceCache& cache, ModelCache& mc, const PriorSpec& spec,
                           const ModelId& m, int p_total) {
  return cache.get_or_compute(m, [&] {
    if (m.bits == 0) return 0.0;
    return log_ml(mc.get_stats(m), spec, p_total).log_bf_vs_ref;
  });
}

SgbpParams model_mixing_params(const PriorSpec& spec, const OlsStats& stats, int p_total) {
  return mixing_params(spec, stats.k0, stats.k1, stats.n, p_total);
}

/// Draw g from f(g | y, M): closed-form-backed grid for the PEP shapes, prior
/// draw when the model adds nothing, generic grid otherwise.
double sample_g_given_model(const OlsStats& stats, const PriorSpec& spec, int p_total,
                            CounterRng& rng) {
  const SgbpParams prm = model_mixing_params(spec, stats, p_total);
  if (stats.ke() == 0) return sample_g(prm, rng);
  if (pep_shaped(spec.family)) return sample_posterior_g(stats, spec, rng);
  const double scale = prm.q > 0.0 ? prm.q : 1.0;
  auto ld = [&](double v) {
    const double g = prm.s + scale * v / (1.0 - v);
    const LogValue pg = log_density_g(prm, g);
    if (pg.is_zero()) return kNegInf;
    return log_ml_given_g(stats, g, spec.d0) + pg.log_magnitude - 2.0 * std::log1p(-v);
  };
  const double v = sample_grid_log_density(ld, 0.0, 1.0, 4096, rng);
  return prm.s + scale * v / (1.0 - v);
}

void record_state(ChainTrace& trace, const SamplerConfig& cfg, long long t,
                  const ChainState& st, double log_ev) {
  if (t < cfg.burnin || (t - cfg.burnin) % cfg.thin != 0) return;
  trace.states.push_back(st);
  trace.log_evidence.push_back(log_ev);
}

int scan_index(const SamplerConfig& cfg, int p, int sweep_pos, CounterRng& rng) {
  if (!cfg.random_scan) return sweep_pos;
  return std::min(p - 1, static_cast<int>(rng.uniform() * p));
}

}  // namespace

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::MC3: return "mc3";
    case Algorithm::MC3GivenG: return "mc3g";
    case Algorithm::GibbsVS: return "gibbs";
  }
  return "?";
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "mc3") return Algorithm::MC3;
  if (name == "mc3g") return Algorithm::MC3GivenG;
  if (name == "gibbs") return Algorithm::GibbsVS;
  throw std::invalid_argument("unknown sampler algorithm '" + name + "'");
}

bool bvs_step(ChainState& state, int j,
              const std::function<double(const ModelId&, const ModelId&)>& ratio_fn,
              CounterRng& rng, ChainTrace& trace) {
  if (j < 0 || j >= state.gamma.p) throw std::invalid_argument("bvs_step: index out of range");
  ModelId proposed = state.gamma;
  proposed.set(j, !proposed.includes(j));
  ++trace.proposals;
  double a;
  try {
    a = ratio_fn(proposed, state.gamma);
  } catch (const std::exception&) {
    ++trace.ratio_failures;
    return false;
  }
  // the uniform is consumed on every attempt so the stream stays aligned
  const double u = rng.uniform();
  if (a >= 1.0 || u < a) {
    state.gamma = proposed;
    ++trace.accepts;
    return true;
  }
  return false;
}

ChainTrace run_mc3(const Dataset& ds, const PriorSpec& spec, const SamplerConfig& cfg) {
  validate_config(cfg);
  const int p = ds.p();
  ChainTrace trace;
  trace.p = p;
  trace.k0 = 1 + static_cast<int>(cfg.reference_cols.size());
  trace.algorithm = Algorithm::MC3;
  trace.states.reserve(kept_length(cfg));

  ModelCache mc{ds, cfg.reference_cols, false};
  EvidenceCache cache;
  CounterRng rng(cfg.seed, 1);

  ChainState st;
  st.gamma = initial_gamma(ds, cfg);
  st.sigma2 = kNaN;
  st.g = kNaN;

  auto log_target = [&](const ModelId& m) {
    return cached_log_evidence(cache, mc, spec, m, p) + log_model_prior(m, cfg.model_prior);
  };
  auto ratio = [&](const ModelId& prop, const ModelId& cur) {
    return std::exp(log_target(prop) - log_target(cur));
  };

  for (long long t = 0; t < cfg.iterations; ++t) {
    if (!cfg.fix_model)
      for (int s = 0; s < p; ++s) bvs_step(st, scan_index(cfg, p, s, rng), ratio, rng, trace);
    record_state(trace, cfg, t, st, cached_log_evidence(cache, mc, spec, st.gamma, p));
  }
  return trace;
}

ChainTrace run_mc3_given_g(const Dataset& ds, const PriorSpec& spec, const SamplerConfig& cfg) {
  validate_config(cfg);
  if (spec.family == Family::FixedG)
    throw DegenerateFamily("mc3 given g: fixed-g has no hyper-prior of g");
  const int p = ds.p();
  ChainTrace trace;
  trace.p = p;
  trace.k0 = 1 + static_cast<int>(cfg.reference_cols.size());
  trace.algorithm = Algorithm::MC3GivenG;
  trace.states.reserve(kept_length(cfg));

  ModelCache mc{ds, cfg.reference_cols, false};
  EvidenceCache cache;
  CounterRng rng(cfg.seed, 2);

  ChainState st;
  st.gamma = initial_gamma(ds, cfg);
  st.sigma2 = kNaN;
  st.g = initial_g(ds, spec, st.gamma, cfg.reference_cols);

  auto log_target = [&](const ModelId& m, double g) {
    const OlsStats& stats = mc.get_stats(m);
    const LogValue pg = log_density_g(model_mixing_params(spec, stats, p), g);
    if (pg.is_zero()) return kNegInf;
    return log_ml_given_g(stats, g, spec.d0) + pg.log_magnitude +
           log_model_prior(m, cfg.model_prior);
  };

  for (long long t = 0; t < cfg.iterations; ++t) {
    st.g = sample_g_given_model(mc.get_stats(st.gamma), spec, p, rng);
    if (!cfg.fix_model) {
      auto ratio = [&](const ModelId& prop, const ModelId& cur) {
        const double lp = log_target(prop, st.g);
        if (lp == kNegInf) {
          ++trace.support_rejections;
          return 0.0;
        }
        return std::exp(lp - log_target(cur, st.g));
      };
      for (int s = 0; s < p; ++s) bvs_step(st, scan_index(cfg, p, s, rng), ratio, rng, trace);
    }
    record_state(trace, cfg, t, st, cached_log_evidence(cache, mc, spec, st.gamma, p));
  }
  return trace;
}

ChainTrace run_gibbs_vs(const Dataset& ds, const PriorSpec& spec, const SamplerConfig& cfg) {
  validate_config(cfg);
  const int p = ds.p();
  const int k0 = 1 + static_cast<int>(cfg.reference_cols.size());
  const int n = ds.n();
  const bool fixed_g = spec.family == Family::FixedG;
  ChainTrace trace;
  trace.p = p;
  trace.k0 = k0;
  trace.algorithm = Algorithm::GibbsVS;
  trace.has_beta = true;
  trace.states.reserve(kept_length(cfg));

  ModelCache mc{ds, cfg.reference_cols, true};
  EvidenceCache cache;
  CounterRng rng(cfg.seed, 3);

  // Pseudoprior: full-model least-squares coordinates with their standard
  // errors, unless the caller supplied one.
  std::vector<double> pmean = cfg.pseudo_mean, psd = cfg.pseudo_sd;
  if (pmean.empty()) {
    const ModelContext& full = mc.get_ctx(ModelId::full(p));
    const OlsStats& fs = full.stats;
    const double s2 = fs.rss / std::max(1, n - fs.k1);
    Eigen::MatrixXd XtX1(fs.k1, fs.k1);
    XtX1.topLeftCorner(k0, k0) = full.XtX0;
    XtX1.topRightCorner(k0, p) = full.X0tXe;
    XtX1.bottomLeftCorner(p, k0) = full.X0tXe.transpose();
    XtX1.bottomRightCorner(p, p) = full.XtXe;
    const Eigen::MatrixXd inv = XtX1.llt().solve(Eigen::MatrixXd::Identity(fs.k1, fs.k1));
    pmean.resize(p);
    psd.resize(p);
    for (int j = 0; j < p; ++j) {
      pmean[j] = fs.beta_hat[k0 + j];
      psd[j] = std::sqrt(std::max(s2 * inv(k0 + j, k0 + j), 1e-12));
    }
  }
  if (static_cast<int>(pmean.size()) != p || psd.size() != pmean.size())
    throw std::invalid_argument("gibbs: pseudoprior vectors must have length p");

  auto log_pseudo = [&](int j, double b) {
    const double z = (b - pmean[j]) / psd[j];
    return -0.5 * std::log(2.0 * M_PI) - std::log(psd[j]) - 0.5 * z * z;
  };

  ChainState st;
  st.gamma = initial_gamma(ds, cfg);
  st.beta = Eigen::VectorXd::Zero(k0 + p);
  st.sigma2 = 1.0;
  st.g = initial_g(ds, spec, st.gamma, cfg.reference_cols);

  auto gather_beta_e = [&](const ModelId& m) {
    Eigen::VectorXd be(m.dimension());
    for (int j = 0, r = 0; j < p; ++j)
      if (m.includes(j)) be[r++] = st.beta[k0 + j];
    return be;
  };

  // log of likelihood x included-coefficient prior x hyper-prior of g for one
  // model at the current parameter values; the shared baseline and the pseudo
  // terms common to both sides of a flip are left out.
  auto log_joint = [&](const ModelId& m) {
    const ModelContext& ctx = mc.get_ctx(m);
    const int ke = ctx.mm.ke();
    const Eigen::VectorXd be = gather_beta_e(m);
    Eigen::VectorXd resid = ds.y - ctx.mm.X0 * st.beta.head(k0);
    if (ke > 0) resid -= ctx.mm.Xe * be;
    double lp = -0.5 * n * std::log(2.0 * M_PI * st.sigma2) -
                resid.squaredNorm() / (2.0 * st.sigma2);
    if (ke > 0) {
      lp += -0.5 * ke * std::log(2.0 * M_PI * st.g * st.sigma2) + mc.half_logdet(m) -
            be.dot(ctx.mm.Ve_inv * be) / (2.0 * st.g * st.sigma2);
    }
    if (!fixed_g) {
      const LogValue pg = log_density_g(model_mixing_params(spec, ctx.stats, p), st.g);
      if (pg.is_zero()) return kNegInf;
      lp += pg.log_magnitude;
    }
    return lp + log_model_prior(m, cfg.model_prior);
  };

  auto ratio = [&](const ModelId& prop, const ModelId& cur) {
    const double lp = log_joint(prop);
    if (lp == kNegInf) {
      ++trace.support_rejections;
      return 0.0;
    }
    const int j = static_cast<int>(std::countr_zero(prop.bits ^ cur.bits));
    double la = lp - log_joint(cur);
    // the flipped coordinate's pseudoprior factor appears on the side that
    // excludes it
    la += (cur.includes(j) ? 1.0 : -1.0) * log_pseudo(j, st.beta[k0 + j]);
    return std::exp(la);
  };

  auto update_parameters = [&]() {
    const ModelContext& ctx = mc.get_ctx(st.gamma);
    const int ke = ctx.mm.ke();

    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    cond_beta_joint(ctx, st.sigma2, st.g, &mean, &cov);
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw std::runtime_error("gibbs: singular beta covariance");
    Eigen::VectorXd z(mean.size());
    for (int i = 0; i < z.size(); ++i) z[i] = rng.normal();
    const Eigen::VectorXd draw = mean + llt.matrixL() * z;
    st.beta.head(k0) = draw.head(k0);
    for (int j = 0, r = 0; j < p; ++j) {
      if (st.gamma.includes(j))
        st.beta[k0 + j] = draw[k0 + r++];
      else
        st.beta[k0 + j] = pmean[j] + psd[j] * rng.normal();
    }

    double shape, rate;
    cond_sigma2(ctx, st.beta.head(k0), gather_beta_e(st.gamma), st.g, spec.d0, &shape, &rate,
                cfg.printed_sigma_variant);
    st.sigma2 = rate / rng.gamma(shape);

    if (fixed_g) return;
    const Eigen::VectorXd be = gather_beta_e(st.gamma);
    const SgbpParams prm = model_mixing_params(spec, ctx.stats, p);
    if (ke == 0) {
      st.g = sample_g(prm, rng);
    } else if (pep_shaped(spec.family)) {
      const ChParams ch = cond_u_ch(ctx, be, st.sigma2, spec, cfg.printed_u_variant);
      st.g = prm.s / (1.0 - sample_ch(ch, rng));
    } else {
      const double quad = be.dot(ctx.mm.Ve_inv * be);
      const double scale = prm.q > 0.0 ? prm.q : 1.0;
      auto ld = [&](double v) {
        const double g = prm.s + scale * v / (1.0 - v);
        const LogValue pg = log_density_g(prm, g);
        if (pg.is_zero() || g <= 0.0) return kNegInf;
        return -0.5 * ke * std::log(g) - quad / (2.0 * g * st.sigma2) + pg.log_magnitude -
               2.0 * std::log1p(-v);
      };
      const double v = sample_grid_log_density(ld, 0.0, 1.0, 4096, rng);
      st.g = prm.s + scale * v / (1.0 - v);
    }
  };

  for (long long t = 0; t < cfg.iterations; ++t) {
    try {
      update_parameters();
    } catch (const std::exception&) {
      st.sigma2 += 1e-8;  // one retry with jitter, then give up loudly
      try {
        update_parameters();
      } catch (const std::exception& e) {
        throw std::runtime_error("gibbs: conditional update failed at iteration " +
                                 std::to_string(t) + ": " + e.what());
      }
    }
    if (!cfg.fix_model)
      for (int s = 0; s < p; ++s) bvs_step(st, scan_index(cfg, p, s, rng), ratio, rng, trace);
    record_state(trace, cfg, t, st, cached_log_evidence(cache, mc, spec, st.gamma, p));
  }
  return trace;
}

ChainTrace run_sampler(const Dataset& ds, const PriorSpec& spec, const SamplerConfig& cfg) {
  switch (cfg.algorithm) {
    case Algorithm::MC3: return run_mc3(ds, spec, cfg);
    case Algorithm::MC3GivenG: return run_mc3_given_g(ds, spec, cfg);
    case Algorithm::GibbsVS: return run_gibbs_vs(ds, spec, cfg);
  }
  throw std::logic_error("run_sampler: unreachable");
}

TraceSummary trace_summaries(const ChainTrace& trace) {
  if (trace.states.empty()) throw std::invalid_argument("trace_summaries: empty trace");
  const int p = trace.p;
  TraceSummary out;
  out.inclusion_probs.assign(p, 0.0);
  out.dim_posterior.assign(p + 1, 0.0);
  std::unordered_map<std::uint64_t, long long> visits;
  std::vector<double> logg;
  logg.reserve(trace.states.size());
  for (const auto& st : trace.states) {
    out.dim_posterior[st.gamma.dimension()] += 1.0;
    for (int j = 0; j < p; ++j)
      if (st.gamma.includes(j)) out.inclusion_probs[j] += 1.0;
    ++visits[st.gamma.bits];
    if (std::isfinite(st.g) && st.g > 0.0) logg.push_back(std::log(st.g));
  }
  const double inv = 1.0 / trace.states.size();
  for (auto& v : out.inclusion_probs) v *= inv;
  for (auto& v : out.dim_posterior) v *= inv;

  if (!logg.empty()) {
    double lo = *std::min_element(logg.begin(), logg.end());
    double hi = *std::max_element(logg.begin(), logg.end());
    if (hi - lo < 1e-12) {  // degenerate trace: widen to a unit window
      lo -= 0.5;
      hi += 0.5;
    }
    const int bins = 100;
    const double h = (hi - lo) / bins;
    out.log_g_edges.resize(bins + 1);
    for (int i = 0; i <= bins; ++i) out.log_g_edges[i] = lo + i * h;
    out.log_g_density.assign(bins, 0.0);
    for (double v : logg) {
      int b = static_cast<int>((v - lo) / h);
      if (b >= bins) b = bins - 1;
      out.log_g_density[b] += 1.0;
    }
    for (auto& d : out.log_g_density) d /= logg.size() * h;
  }

  out.visit_counts.assign(visits.begin(), visits.end());
  std::sort(out.visit_counts.begin(), out.visit_counts.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

void write_trace_csv(const ChainTrace& trace, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("write_trace_csv: cannot open '" + path + "'");
  std::fprintf(f, "iteration,gamma,sigma2,g,log_evidence\n");
  for (std::size_t i = 0; i < trace.states.size(); ++i) {
    const ChainState& st = trace.states[i];
    std::fprintf(f, "%zu,%s,%.17g,%.17g,%.17g\n", i, st.gamma.to_string().c_str(), st.sigma2,
                 st.g, trace.log_evidence[i]);
  }
  std::fclose(f);
}

namespace {

void put_u64(std::FILE* f, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  std::fwrite(b, 1, 8, f);
}

void put_f64(std::FILE* f, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  put_u64(f, u);
}

std::uint64_t get_u64(std::FILE* f) {
  unsigned char b[8];
  if (std::fread(b, 1, 8, f) != 8) throw std::runtime_error("trace: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::FILE* f) {
  const std::uint64_t u = get_u64(f);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

}  // namespace

void write_trace_binary(const ChainTrace& trace, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("write_trace_binary: cannot open '" + path + "'");
  std::fwrite("PEPT1", 1, 5, f);
  put_u64(f, trace.states.size());
  put_u64(f, static_cast<std::uint64_t>(trace.p));
  const std::uint64_t blen = trace.has_beta ? trace.k0 + trace.p : 0;
  put_u64(f, blen);
  for (std::size_t i = 0; i < trace.states.size(); ++i) {
    const ChainState& st = trace.states[i];
    put_u64(f, st.gamma.bits);
    put_f64(f, st.sigma2);
    put_f64(f, st.g);
    put_f64(f, trace.log_evidence[i]);
    for (std::uint64_t j = 0; j < blen; ++j) put_f64(f, st.beta[static_cast<int>(j)]);
  }
  std::fclose(f);
}

ChainTrace read_trace_binary(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("read_trace_binary: cannot open '" + path + "'");
  char magic[5];
  if (std::fread(magic, 1, 5, f) != 5 || std::memcmp(magic, "PEPT1", 5) != 0) {
    std::fclose(f);
    throw std::runtime_error("read_trace_binary: bad magic");
  }
  ChainTrace trace;
  const std::uint64_t count = get_u64(f);
  trace.p = static_cast<int>(get_u64(f));
  const std::uint64_t blen = get_u64(f);
  trace.has_beta = blen > 0;
  trace.k0 = trace.has_beta ? static_cast<int>(blen) - trace.p : 1;
  trace.states.resize(count);
  trace.log_evidence.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    ChainState& st = trace.states[i];
    st.gamma = ModelId{get_u64(f), trace.p};
    st.sigma2 = get_f64(f);
    st.g = get_f64(f);
    trace.log_evidence[i] = get_f64(f);
    st.beta.resize(blen);
    for (std::uint64_t j = 0; j < blen; ++j) st.beta[static_cast<int>(j)] = get_f64(f);
  }
  std::fclose(f);
  return trace;
}

}  // namespace pep
