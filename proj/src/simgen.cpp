#include "pep/simgen.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>

namespace pep {

namespace {

void fill_names(Dataset& ds) {
  ds.names.resize(ds.p());
  for (int j = 0; j < ds.p(); ++j) ds.names[j] = "X" + std::to_string(j + 1);
}

/// Y_i ~ N(4 + 2 X1 - X5 + 1.5 X7 + X11 + 0.5 X13, 2.5^2)
void fill_response(Dataset& ds, CounterRng& rng) {
  const int n = ds.n();
  ds.y.resize(n);
  for (int i = 0; i < n; ++i) {
    const double mu = 4.0 + 2.0 * ds.X(i, 0) - ds.X(i, 4) + 1.5 * ds.X(i, 6) + ds.X(i, 10) +
                      0.5 * ds.X(i, 12);
    ds.y[i] = mu + 2.5 * rng.normal();
  }
}

}  // namespace

Dataset gen_scenario1(const ScenarioConfig& cfg, CounterRng& rng) {
  if (cfg.p < 13) throw std::invalid_argument("gen_scenario1: requires p >= 13");
  Dataset ds;
  ds.X.resize(cfg.n, cfg.p);
  for (int i = 0; i < cfg.n; ++i)
    for (int j = 0; j < cfg.p; ++j) ds.X(i, j) = rng.normal();
  ds.y.resize(cfg.n);
  fill_response(ds, rng);
  fill_names(ds);
  return ds;
}

Dataset gen_scenario2(const ScenarioConfig& cfg, CounterRng& rng) {
  if (cfg.p != 15)
    throw std::invalid_argument("gen_scenario2: the 10 + 5 construction requires p = 15");
  Dataset ds;
  ds.X.resize(cfg.n, cfg.p);
  for (int i = 0; i < cfg.n; ++i)
    for (int j = 0; j < 10; ++j) ds.X(i, j) = rng.normal();
  for (int i = 0; i < cfg.n; ++i) {
    const double mu = 0.3 * ds.X(i, 0) + 0.5 * ds.X(i, 1) + 0.7 * ds.X(i, 2) + 0.9 * ds.X(i, 3) +
                      1.1 * ds.X(i, 4);
    for (int j = 10; j < 15; ++j) ds.X(i, j) = mu + rng.normal();
  }
  ds.y.resize(cfg.n);
  fill_response(ds, rng);
  fill_names(ds);
  return ds;
}

Dataset gen_scenario(const ScenarioConfig& cfg, int replicate) {
  CounterRng rng(cfg.seed ^ static_cast<std::uint64_t>(replicate), 101);
  if (cfg.scenario == 1) return gen_scenario1(cfg, rng);
  if (cfg.scenario == 2) return gen_scenario2(cfg, rng);
  throw std::invalid_argument("gen_scenario: scenario must be 1 or 2");
}

StudyResult run_study(const ScenarioConfig& cfg, const std::vector<StudyMethod>& methods,
                      int threads) {
  if (cfg.p > 25) throw std::invalid_argument("run_study: p too large for enumeration");
  StudyResult study;
  study.p = cfg.p;
  study.cells.resize(static_cast<size_t>(cfg.replicates) * methods.size());

  auto work = [&](int lo, int hi) {
    for (int r = lo; r < hi; ++r) {
      Dataset ds;
      bool generated = false;
      try {
        ds = gen_scenario(cfg, r);
        generated = true;
      } catch (const std::exception&) {
      }
      for (size_t m = 0; m < methods.size(); ++m) {
        StudyCell& cell = study.cells[r * methods.size() + m];
        cell.replicate = r;
        cell.method = methods[m].label;
        if (!generated) {
          cell.failed = true;
          continue;
        }
        try {
          EnumerateOptions opts;
          opts.model_prior = methods[m].model_prior;
          const PosteriorTable table = enumerate_models(ds, methods[m].spec, opts);
          cell.inclusion_probs = table.inclusion_probs;
          cell.mean_dimension = 0.0;
          for (size_t d = 0; d < table.dim_posterior.size(); ++d)
            cell.mean_dimension += d * table.dim_posterior[d];
        } catch (const std::exception&) {
          cell.failed = true;
        }
      }
    }
  };

  const int nthreads = std::max(1, threads);
  if (nthreads == 1) {
    work(0, cfg.replicates);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (cfg.replicates + nthreads - 1) / nthreads;
    for (int i = 0; i < nthreads; ++i) {
      const int lo = i * chunk;
      if (lo >= cfg.replicates) break;
      pool.emplace_back(work, lo, std::min(cfg.replicates, lo + chunk));
    }
    for (auto& th : pool) th.join();
  }
  return study;
}

void write_study_csv(const StudyResult& study, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("write_study_csv: cannot open '" + path + "'");
  std::fprintf(f, "replicate,method,covariate,inclusion_prob\n");
  for (const auto& cell : study.cells) {
    if (cell.failed) continue;
    for (int j = 0; j < study.p; ++j)
      std::fprintf(f, "%d,%s,%d,%.17g\n", cell.replicate, cell.method.c_str(), j + 1,
                   cell.inclusion_probs[j]);
  }
  std::fclose(f);
}

}  // namespace pep
