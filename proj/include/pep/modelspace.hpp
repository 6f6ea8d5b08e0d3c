#pragma once

#include <string>
#include <vector>

#include "pep/evidence.hpp"

namespace pep {

enum class ModelPrior { Uniform, UniformOnDimension };

std::string model_prior_name(ModelPrior mp);
ModelPrior model_prior_from_name(const std::string& name);

/// Log prior mass of a model among p candidates. Uniform puts 2^-p on each
/// model; UniformOnDimension splits mass evenly over dimensions first, then
/// over the models of that dimension.
double log_model_prior(const ModelId& m, ModelPrior mp);

struct ModelRecord {
  ModelId model;
  double log_evidence = 0.0;  // log BF against the reference model
  double log_post = 0.0;      // normalized log posterior probability
  EvidenceMethod method = EvidenceMethod::ClosedFormF1;
};

struct PosteriorTable {
  std::vector<ModelRecord> records;       // enumeration order
  std::vector<double> inclusion_probs;    // per covariate
  std::vector<double> dim_posterior;      // indexed by dimension 0..p
  double log_normalizer = 0.0;            // log sum of prior-weighted evidence
  ModelId map_model;

  /// Records sorted by posterior probability (desc), ties broken toward the
  /// smaller model then lexicographically; optionally truncated.
  std::vector<ModelRecord> top(int count) const;
};

struct EnumerateOptions {
  ModelPrior model_prior = ModelPrior::Uniform;
  std::vector<int> reference_cols;
  int threads = 1;
};

/// Full enumeration of the 2^p model space (p <= 25). Evidence is computed per
/// model, combined with the model prior and normalized by log-sum-exp. The
/// thread split is deterministic: results are identical for any thread count.
PosteriorTable enumerate_models(const Dataset& ds, const PriorSpec& spec,
                                const EnumerateOptions& opts = {});

/// Highest-posterior model of a table; ties resolve to the smaller dimension,
/// then to the lexicographically smaller bit string.
ModelId map_model(const PosteriorTable& table);

void write_table_csv(const PosteriorTable& table, const Dataset& ds, const std::string& path,
                     int top_count = 0);

}  // namespace pep
