#include "pep/modelspace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>

namespace pep {

namespace {

double log_choose(int n, int k) {
  return specfun::log_gamma(n + 1.0) - specfun::log_gamma(k + 1.0) -
         specfun::log_gamma(n - k + 1.0);
}

/// Ordering used for every tie-break: smaller dimension first, then the
/// numerically smaller bit pattern.
bool model_less(const ModelId& a, const ModelId& b) {
  const int da = a.dimension(), db = b.dimension();
  if (da != db) return da < db;
  return a.bits < b.bits;
}

}  // namespace

std::string model_prior_name(ModelPrior mp) {
  return mp == ModelPrior::Uniform ? "uniform" : "uniform-dim";
}

ModelPrior model_prior_from_name(const std::string& name) {
  if (name == "uniform") return ModelPrior::Uniform;
  if (name == "uniform-dim") return ModelPrior::UniformOnDimension;
  throw std::invalid_argument("unknown model prior '" + name + "'");
}

double log_model_prior(const ModelId& m, ModelPrior mp) {
  if (mp == ModelPrior::Uniform) return -m.p * std::log(2.0);
  return -std::log(m.p + 1.0) - log_choose(m.p, m.dimension());
}

std::vector<ModelRecord> PosteriorTable::top(int count) const {
  std::vector<ModelRecord> out = records;
  std::sort(out.begin(), out.end(), [](const ModelRecord& a, const ModelRecord& b) {
    if (a.log_post != b.log_post) return a.log_post > b.log_post;
    return model_less(a.model, b.model);
  });
  if (count > 0 && static_cast<int>(out.size()) > count) out.resize(count);
  return out;
}

PosteriorTable enumerate_models(const Dataset& ds, const PriorSpec& spec,
                                const EnumerateOptions& opts) {
  const int p = ds.p();
  if (p > 25) throw std::invalid_argument("enumerate_models: p > 25; use a sampler");
  const std::uint64_t count = 1ULL << p;

  PosteriorTable table;
  table.records.resize(count);

  auto work = [&](std::uint64_t lo, std::uint64_t hi) {
    for (std::uint64_t t = lo; t < hi; ++t) {
      // Gray-code visit order keeps successive models one flip apart.
      const ModelId m{t ^ (t >> 1), p};
      ModelRecord& rec = table.records[t];
      rec.model = m;
      if (m.bits == 0) {
        rec.log_evidence = 0.0;
        rec.method = EvidenceMethod::ClosedFormF1;
      } else {
        const OlsStats stats = ols_stats(ds, m, opts.reference_cols);
        const EvidenceResult ev = log_ml(stats, spec, p);
        rec.log_evidence = ev.log_bf_vs_ref;
        rec.method = ev.method;
      }
      rec.log_post = rec.log_evidence + log_model_prior(m, opts.model_prior);
    }
  };

  const int nthreads = std::max(1, opts.threads);
  if (nthreads == 1 || count < 64) {
    work(0, count);
  } else {
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (count + nthreads - 1) / nthreads;
    for (int i = 0; i < nthreads; ++i) {
      const std::uint64_t lo = i * chunk;
      if (lo >= count) break;
      pool.emplace_back(work, lo, std::min(count, lo + chunk));
    }
    for (auto& th : pool) th.join();
  }

  // log-sum-exp normalization in a fixed (enumeration) order
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& rec : table.records) m = std::max(m, rec.log_post);
  double z = 0.0;
  for (const auto& rec : table.records) z += std::exp(rec.log_post - m);
  table.log_normalizer = m + std::log(z);

  table.inclusion_probs.assign(p, 0.0);
  table.dim_posterior.assign(p + 1, 0.0);
  for (auto& rec : table.records) {
    rec.log_post -= table.log_normalizer;
    const double pr = std::exp(rec.log_post);
    table.dim_posterior[rec.model.dimension()] += pr;
    for (int j = 0; j < p; ++j)
      if (rec.model.includes(j)) table.inclusion_probs[j] += pr;
  }
  table.map_model = map_model(table);
  return table;
}

ModelId map_model(const PosteriorTable& table) {
  if (table.records.empty()) throw std::invalid_argument("map_model: empty table");
  const ModelRecord* best = &table.records.front();
  for (const auto& rec : table.records) {
    if (rec.log_post > best->log_post ||
        (rec.log_post == best->log_post && model_less(rec.model, best->model)))
      best = &rec;
  }
  return best->model;
}

void write_table_csv(const PosteriorTable& table, const Dataset& ds, const std::string& path,
                     int top_count) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("write_table_csv: cannot open '" + path + "'");
  std::fprintf(f, "model,dimension,log_evidence,post_prob,method\n");
  for (const auto& rec : table.top(top_count)) {
    std::fprintf(f, "%s,%d,%.17g,%.17g,%s\n", rec.model.to_string().c_str(),
                 rec.model.dimension(), rec.log_evidence, std::exp(rec.log_post),
                 evidence_method_name(rec.method).c_str());
  }
  std::fclose(f);
  (void)ds;
}

}  // namespace pep
