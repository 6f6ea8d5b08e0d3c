#pragma once

#include <functional>
#include <mutex>
#include <unordered_map>

#include "pep/dataset.hpp"
#include "pep/priors.hpp"

namespace pep {

enum class EvidenceMethod { ClosedFormF1, ConditionalFixedG, Quadrature, Laplace };

std::string evidence_method_name(EvidenceMethod m);

/// Log marginal likelihood relative to the reference model M0 (which is
/// exactly 0); the data-dependent constant C1 cancels and is never formed.
struct EvidenceResult {
  double log_bf_vs_ref = 0.0;
  EvidenceMethod method = EvidenceMethod::ClosedFormF1;
  double diag = 0.0;  // quadrature error estimate (log scale) or 0
};

/// log[f(y | g, M1) / C1] from the conditional normal-inverse-gamma marginal:
/// ((n+d0-k1)/2) log(1+g) - ((n+d0-k0)/2) log(1+g R10).
double log_ml_given_g(const OlsStats& stats, double g, double d0);

/// Closed-form Appell-F1 evidence for the PEP-shaped families
/// (PEP / EPP / Intrinsic). Falls back to a Laplace approximation of the
/// g-integral if the F1 quadrature fails, tagging the result accordingly.
EvidenceResult log_ml_pep_closed(const OlsStats& stats, const PriorSpec& spec);

/// Generic evidence: integrates the conditional marginal against the family's
/// mixing density. Works for every family with a proper mixing law; throws
/// DegenerateFamily for FixedG. p_total is only consulted by Benchmark/MG.
EvidenceResult log_ml_quadrature(const OlsStats& stats, const PriorSpec& spec, int p_total = 0);

/// Quadrature evidence against a caller-supplied log mixing density on
/// (lo, hi); the hook used for Zellner-Siow and other non-SGBP laws.
EvidenceResult log_ml_quadrature_custom(const OlsStats& stats, double d0,
                                        const std::function<double(double)>& log_prior_g,
                                        double lo, double hi);

/// Family dispatch: closed form for PEP/EPP/Intrinsic, the fixed-g conditional
/// for FixedG, quadrature for everything else.
EvidenceResult log_ml(const OlsStats& stats, const PriorSpec& spec, int p_total = 0);

/// log BF(M1 : M2) = log_bf_vs_ref(M1) - log_bf_vs_ref(M2).
double log_bayes_factor(const OlsStats& stats1, const OlsStats& stats2, const PriorSpec& spec,
                        int p_total = 0);

/// Absolute log marginal of the reference model under the improper baseline,
/// up to the shared normalizing constant c0 (which cancels in every predictive
/// ratio). Needed only by the cross-validated predictive score.
double log_ml_reference(const Dataset& ds, double d0, const std::vector<int>& reference_cols = {});

/// Per-run memo of log evidence keyed by model; safe for concurrent access.
class EvidenceCache {
 public:
  double get_or_compute(const ModelId& m, const std::function<double()>& compute) {
    {
      std::lock_guard<std::mutex> lk(mu_);
      auto it = map_.find(m.bits);
      if (it != map_.end()) return it->second;
    }
    const double v = compute();
    std::lock_guard<std::mutex> lk(mu_);
    return map_.emplace(m.bits, v).first->second;
  }

 private:
  std::mutex mu_;
  std::unordered_map<std::uint64_t, double> map_;
};

}  // namespace pep
