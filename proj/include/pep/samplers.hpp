#pragma once

#include <cstdint>
#include <utility>

#include "pep/modelspace.hpp"
#include "pep/posterior.hpp"

namespace pep {

enum class Algorithm { MC3, MC3GivenG, GibbsVS };

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

struct SamplerConfig {
  long long iterations = 100000;
  long long burnin = 10000;
  std::uint64_t seed = 0;
  Algorithm algorithm = Algorithm::MC3;
  int thin = 1;
  ModelPrior model_prior = ModelPrior::Uniform;
  std::vector<int> reference_cols;
  bool random_scan = false;       // default: systematic 1..p sweep
  bool fix_model = false;         // freeze gamma at the initial model (diagnostics)
  bool has_initial_model = false;
  ModelId initial_model;
  bool printed_sigma_variant = false;  // typeset sigma^2 rate, for comparison runs
  bool printed_u_variant = false;      // typeset CH second parameter, likewise
  // Pseudoprior override for the excluded-coefficient draws (GibbsVS). Empty:
  // normal at the full-model least-squares coordinate with its standard error.
  std::vector<double> pseudo_mean, pseudo_sd;
};

struct ChainState {
  ModelId gamma;
  Eigen::VectorXd beta;  // k0 reference slots then all p covariate slots
  double sigma2 = 1.0;
  double g = 1.0;
};

struct ChainTrace {
  std::vector<ChainState> states;
  std::vector<double> log_evidence;  // marginal evidence of the visited model
  int p = 0, k0 = 1;
  Algorithm algorithm = Algorithm::MC3;
  bool has_beta = false;
  long long proposals = 0, accepts = 0;
  long long ratio_failures = 0;      // evidence/conditional failures, step skipped
  long long support_rejections = 0;  // g below the proposed model's support
};

/// One variable-flip Metropolis step: proposes gamma_j <- 1 - gamma_j and
/// accepts with min{1, A_j}; A_j comes from the calling scheme. Returns true
/// on acceptance; a throwing ratio_fn skips the step and bumps the counter.
bool bvs_step(ChainState& state, int j,
              const std::function<double(const ModelId& proposed, const ModelId& current)>& ratio_fn,
              CounterRng& rng, ChainTrace& trace);

/// Model-composition chain on gamma alone; A_j from the marginal evidence and
/// the model prior. beta/sigma2/g slots stay empty.
ChainTrace run_mc3(const Dataset& ds, const PriorSpec& spec, const SamplerConfig& cfg);

/// Per iteration, g is drawn from the current model's posterior of g, then a
/// BVS sweep uses the conditional evidence f(y|g,M) with the hyper-prior of g.
ChainTrace run_mc3_given_g(const Dataset& ds, const PriorSpec& spec, const SamplerConfig& cfg);

/// Full-parameter Gibbs variable selection: included coefficients from the
/// joint normal conditional, excluded ones from the pseudoprior, sigma^2 and g
/// from their conditionals, then a BVS sweep on the complete-data target.
ChainTrace run_gibbs_vs(const Dataset& ds, const PriorSpec& spec, const SamplerConfig& cfg);

ChainTrace run_sampler(const Dataset& ds, const PriorSpec& spec, const SamplerConfig& cfg);

struct TraceSummary {
  std::vector<double> inclusion_probs;
  std::vector<double> dim_posterior;   // sums to one
  std::vector<double> log_g_edges;     // 101 bin edges over the observed range
  std::vector<double> log_g_density;   // 100 bins, integrates to one
  std::vector<std::pair<std::uint64_t, long long>> visit_counts;  // by count desc
};

TraceSummary trace_summaries(const ChainTrace& trace);

/// CSV: iteration, gamma bitstring, sigma2, g, log evidence.
void write_trace_csv(const ChainTrace& trace, const std::string& path);

/// Compact binary framing: magic "PEPT1", record count, p, beta length, then
/// per record the gamma bits and little-endian 64-bit floats.
void write_trace_binary(const ChainTrace& trace, const std::string& path);
ChainTrace read_trace_binary(const std::string& path);

}  // namespace pep
