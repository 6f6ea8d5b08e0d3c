// pep-select: Bayesian variable selection for normal linear models with
// power-expected-posterior and related mixtures of g-priors.
#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "pep/bma.hpp"
#include "pep/simgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kSchema = "pep-select/1";
constexpr const char* kVersion = "1.0.0";

struct RunConfig {
  std::string command;
  std::string data, response = "y", newdata;
  std::string out = "pep-out";
  std::string format = "json";
  std::string prior = "pep";
  std::string model_prior = "uniform";
  std::string model;  // fixed model bitstring (shrinkage, fix-model runs)
  double delta = std::nan(""), g_fixed = std::nan("");
  int nstar = -1;
  double d0 = 0.0, d1 = 0.0;
  double a_h = 3.0, a_r = 0.5, b_r = 1.0, c_b = 0.01;
  long long iters = 100000, burnin = 10000;
  int thin = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  int top = 0;
  int folds = 8;
  std::string engine = "enumeration";
  int scenario = 1, n = 50, p = 15, replicates = 1;
  bool fix_model = false;
};

pep::PriorSpec make_prior(const RunConfig& rc) {
  pep::PriorSpec spec;
  spec.family = pep::family_from_name(rc.prior);
  spec.delta = rc.delta;
  spec.n_star = rc.nstar;
  spec.d0 = rc.d0;
  spec.d1 = rc.d1;
  spec.a_h = rc.a_h;
  spec.a_r = rc.a_r;
  spec.b_r = rc.b_r;
  spec.c_b = rc.c_b;
  spec.g_fixed = rc.g_fixed;
  return spec;
}

/// Tracks files written into --out so a failed run leaves nothing behind.
struct Artifacts {
  fs::path dir;
  std::vector<fs::path> written;

  explicit Artifacts(const std::string& out) : dir(out) { fs::create_directories(dir); }
  std::string path(const std::string& name) {
    written.push_back(dir / name);
    return (dir / name).string();
  }
  void remove_all() {
    for (const auto& p : written) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }
};

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
}

json config_echo(const RunConfig& rc) {
  return json{{"command", rc.command},     {"data", rc.data},
              {"response", rc.response},   {"newdata", rc.newdata},
              {"out", rc.out},             {"format", rc.format},
              {"prior", rc.prior},         {"model_prior", rc.model_prior},
              {"model", rc.model},         {"delta", rc.delta},
              {"g_fixed", rc.g_fixed},     {"nstar", rc.nstar},
              {"d0", rc.d0},               {"d1", rc.d1},
              {"a_h", rc.a_h},             {"a_r", rc.a_r},
              {"b_r", rc.b_r},             {"c_b", rc.c_b},
              {"iters", rc.iters},         {"burnin", rc.burnin},
              {"thin", rc.thin},           {"seed", rc.seed},
              {"threads", rc.threads},     {"top", rc.top},
              {"folds", rc.folds},         {"engine", rc.engine},
              {"scenario", rc.scenario},   {"n", rc.n},
              {"p", rc.p},                 {"replicates", rc.replicates},
              {"fix_model", rc.fix_model}};
}

void write_manifest(Artifacts& art, const RunConfig& rc, const json& extra) {
  json m{{"schema", kSchema}, {"version", kVersion}, {"config", config_echo(rc)}};
  for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
  write_json(art.path("manifest.json"), m);
}

void write_runlog(Artifacts& art, double wall_ms) {
  // Wall time lives outside the manifest so that seeded reruns stay
  // byte-identical across every artifact the manifest describes.
  std::ofstream out(art.dir / "run.log");
  out << "wall_time_ms " << wall_ms << '\n';
}

pep::Dataset load_data(const RunConfig& rc) {
  if (rc.data.empty()) throw CLI::ValidationError("--data is required for this command");
  return pep::load_csv(rc.data, rc.response);
}

json method_counts(const pep::PosteriorTable& table) {
  std::map<std::string, long long> counts;
  for (const auto& rec : table.records) ++counts[pep::evidence_method_name(rec.method)];
  return json(counts);
}

json summary_json(const pep::TraceSummary& s, const pep::ChainTrace& trace) {
  json top = json::array();
  for (size_t i = 0; i < s.visit_counts.size() && i < 50; ++i) {
    top.push_back({{"model", pep::ModelId{s.visit_counts[i].first, trace.p}.to_string()},
                   {"count", s.visit_counts[i].second}});
  }
  return json{{"inclusion_probs", s.inclusion_probs},
              {"dim_posterior", s.dim_posterior},
              {"log_g_edges", s.log_g_edges},
              {"log_g_density", s.log_g_density},
              {"visit_counts", top},
              {"proposals", trace.proposals},
              {"accepts", trace.accepts},
              {"ratio_failures", trace.ratio_failures},
              {"support_rejections", trace.support_rejections}};
}

/// Reads new covariate rows matching the training column order; a response
/// column, if present, is ignored.
Eigen::MatrixXd load_newdata(const std::string& path, const pep::Dataset& train,
                             const std::string& response) {
  pep::Dataset nd;
  try {
    nd = pep::load_csv(path, response);
  } catch (const std::exception&) {
    // no response column: borrow the first covariate as a fake response and
    // reassemble in training order below
    nd = pep::load_csv(path, train.names.at(0));
    nd.names.insert(nd.names.begin(), train.names.at(0));
    Eigen::MatrixXd X(nd.X.rows(), nd.X.cols() + 1);
    X.col(0) = nd.y;
    X.rightCols(nd.X.cols()) = nd.X;
    nd.X = X;
  }
  Eigen::MatrixXd out(nd.X.rows(), train.p());
  for (int j = 0; j < train.p(); ++j) {
    auto it = std::find(nd.names.begin(), nd.names.end(), train.names[j]);
    if (it == nd.names.end())
      throw std::runtime_error("newdata is missing column '" + train.names[j] + "'");
    out.col(j) = nd.X.col(static_cast<int>(it - nd.names.begin()));
  }
  return out;
}

int run_enumerate(const RunConfig& rc, Artifacts& art) {
  const pep::Dataset ds = load_data(rc);
  pep::EnumerateOptions opts;
  opts.model_prior = pep::model_prior_from_name(rc.model_prior);
  opts.threads = rc.threads;
  const pep::PosteriorTable table = pep::enumerate_models(ds, make_prior(rc), opts);
  pep::write_table_csv(table, ds, art.path("table.csv"), rc.top);
  json j{{"schema", kSchema},
         {"map_model", table.map_model.to_string()},
         {"log_normalizer", table.log_normalizer},
         {"inclusion_probs", table.inclusion_probs},
         {"dim_posterior", table.dim_posterior},
         {"names", ds.names}};
  write_json(art.path("summary.json"), j);
  write_manifest(art, rc, {{"evidence_methods", method_counts(table)}});
  return 0;
}

int run_sampler_cmd(const RunConfig& rc, Artifacts& art, pep::Algorithm alg) {
  const pep::Dataset ds = load_data(rc);
  pep::SamplerConfig cfg;
  cfg.algorithm = alg;
  cfg.iterations = rc.iters;
  cfg.burnin = rc.burnin;
  cfg.thin = rc.thin;
  cfg.seed = rc.seed;
  cfg.fix_model = rc.fix_model;
  cfg.model_prior = pep::model_prior_from_name(rc.model_prior);
  if (!rc.model.empty()) {
    cfg.initial_model = pep::ModelId::from_string(rc.model);
    cfg.has_initial_model = true;
  }
  const pep::PriorSpec spec = make_prior(rc);
  if (alg == pep::Algorithm::GibbsVS && spec.family == pep::Family::FixedG)
    std::fprintf(stderr, "notice: fixed-g prior has no hyper-step for g; g held at its value\n");
  const pep::ChainTrace trace = pep::run_sampler(ds, spec, cfg);
  pep::write_trace_csv(trace, art.path("trace.csv"));
  pep::write_trace_binary(trace, art.path("trace.bin"));
  const pep::TraceSummary s = pep::trace_summaries(trace);
  json j = summary_json(s, trace);
  j["schema"] = kSchema;
  j["names"] = ds.names;
  write_json(art.path("summary.json"), j);
  write_manifest(art, rc, {{"evidence_methods", json::object()}});
  return 0;
}

int run_predict(const RunConfig& rc, Artifacts& art) {
  const pep::Dataset raw = load_data(rc);
  if (rc.newdata.empty()) throw CLI::ValidationError("--newdata is required for predict");
  Eigen::MatrixXd xnew = load_newdata(rc.newdata, raw, rc.response);
  const Eigen::RowVectorXd means = raw.X.colwise().mean();
  const pep::Dataset ds = pep::centre(raw);
  xnew.rowwise() -= means;

  pep::EnumerateOptions opts;
  opts.model_prior = pep::model_prior_from_name(rc.model_prior);
  opts.threads = rc.threads;
  const pep::PosteriorTable table = pep::enumerate_models(ds, make_prior(rc), opts);
  const Eigen::VectorXd yhat =
      pep::bma_predict_closed(table, ds, make_prior(rc), pep::PredictionRequest{xnew});

  std::FILE* f = std::fopen(art.path("predictions.csv").c_str(), "w");
  if (!f) throw std::runtime_error("cannot open predictions.csv");
  std::fprintf(f, "row,prediction\n");
  for (int i = 0; i < yhat.size(); ++i) std::fprintf(f, "%d,%.17g\n", i, yhat[i]);
  std::fclose(f);
  write_manifest(art, rc, {{"evidence_methods", method_counts(table)}});
  return 0;
}

int run_lps(const RunConfig& rc, Artifacts& art) {
  const pep::Dataset ds = load_data(rc);
  const pep::LpsEngine engine =
      rc.engine == "gibbs" ? pep::LpsEngine::Gibbs : pep::LpsEngine::Enumeration;
  pep::SamplerConfig gcfg;
  gcfg.iterations = rc.iters;
  gcfg.burnin = rc.burnin;
  gcfg.thin = rc.thin;
  gcfg.seed = rc.seed;
  const pep::LpsResult res =
      pep::bma_lps(ds, make_prior(rc), pep::model_prior_from_name(rc.model_prior),
                   pep::CvConfig{rc.folds, rc.seed}, engine, &gcfg);
  json j{{"schema", kSchema},      {"fold_scores", res.fold_scores},
         {"mean", res.mean},       {"sd", res.sd},
         {"failed_folds", res.failed_folds}};
  write_json(art.path("lps.json"), j);
  std::FILE* f = std::fopen(art.path("folds.csv").c_str(), "w");
  std::fprintf(f, "row,fold\n");
  for (size_t i = 0; i < res.fold_of.size(); ++i) std::fprintf(f, "%zu,%d\n", i, res.fold_of[i]);
  std::fclose(f);
  write_manifest(art, rc, {{"evidence_methods", json::object()}});
  return 0;
}

int run_simulate(const RunConfig& rc, Artifacts& art) {
  pep::ScenarioConfig cfg;
  cfg.scenario = rc.scenario;
  cfg.n = rc.n;
  cfg.p = rc.p;
  cfg.replicates = rc.replicates;
  cfg.seed = rc.seed;
  for (int r = 0; r < cfg.replicates; ++r) {
    const pep::Dataset ds = pep::gen_scenario(cfg, r);
    const std::string name =
        "scenario" + std::to_string(cfg.scenario) + "_rep" + std::to_string(r) + ".csv";
    pep::write_csv(ds, art.path(name), rc.response);
  }
  write_manifest(art, rc, {{"evidence_methods", json::object()}});
  return 0;
}

int run_shrinkage(const RunConfig& rc, Artifacts& art) {
  const pep::Dataset ds = load_data(rc);
  if (rc.model.empty()) throw CLI::ValidationError("--model is required for shrinkage");
  const pep::ModelId m = pep::ModelId::from_string(rc.model);
  if (m.p != ds.p()) throw CLI::ValidationError("--model bitstring length must equal p");
  const pep::PriorSpec spec = make_prior(rc);
  const pep::OlsStats stats = pep::ols_stats(ds, m);
  const pep::SgbpParams prm = pep::mixing_params(spec, stats.k0, stats.k1, stats.n, ds.p());

  json j{{"schema", kSchema}, {"model", m.to_string()}};
  j["mixing"] = {{"a", prm.a}, {"b", prm.b}, {"p", prm.p}, {"q", prm.q}, {"s", prm.s}};
  try {
    const pep::ShrinkagePriorSummary pw = pep::prior_w_moments(prm);
    j["prior"] = {{"mean_w", pw.mean_w},
                  {"var_w", pw.var_w},
                  {"mean_w_approx", pw.mean_w_approx},
                  {"sd_w_approx", pw.sd_w_approx}};
  } catch (const std::exception&) {
    j["prior"] = nullptr;  // non-PEP shape: no closed prior moments
  }
  if (stats.ke() > 0 && (spec.family == pep::Family::PEP || spec.family == pep::Family::EPP ||
                         spec.family == pep::Family::Intrinsic)) {
    const pep::GPosteriorSummary ps = pep::g_posterior_summary(stats, spec);
    j["posterior"] = {{"mean_w", ps.mean_w},
                      {"var_w", ps.var_w},
                      {"mean_g", ps.mean_g},
                      {"var_g", ps.var_g},
                      {"moment_exists_up_to", ps.moment_exists_up_to}};
  } else {
    j["posterior"] = nullptr;
  }
  j["log_evidence"] = pep::log_ml(stats, spec, ds.p()).log_bf_vs_ref;
  write_json(art.path("shrinkage.json"), j);
  write_manifest(art, rc, {{"evidence_methods", json::object()}});
  return 0;
}

void add_common(CLI::App* cmd, RunConfig& rc, bool wants_data) {
  if (wants_data) {
    cmd->add_option("--data", rc.data, "training data CSV");
    cmd->add_option("--response", rc.response, "response column name");
  }
  cmd->add_option("--prior", rc.prior, "prior family")
      ->check(CLI::IsMember({"pep", "epp", "intrinsic", "hyper-g", "hyper-gn", "robust",
                             "benchmark", "mg", "g-prior"}));
  cmd->add_option("--delta", rc.delta, "power parameter (default n)");
  cmd->add_option("--nstar", rc.nstar, "training sample size (default n)");
  cmd->add_option("--d0", rc.d0, "baseline exponent d0");
  cmd->add_option("--d1", rc.d1, "baseline exponent d1");
  cmd->add_option("--g", rc.g_fixed, "fixed g for --prior g-prior (default n)");
  cmd->add_option("--ah", rc.a_h, "hyper-g family parameter a");
  cmd->add_option("--ar", rc.a_r, "robust parameter a");
  cmd->add_option("--br", rc.b_r, "robust parameter b");
  cmd->add_option("--cb", rc.c_b, "benchmark parameter c");
  cmd->add_option("--model-prior", rc.model_prior, "prior over models")
      ->check(CLI::IsMember({"uniform", "uniform-dim"}));
  cmd->add_option("--seed", rc.seed, "random seed");
  cmd->add_option("--out", rc.out, "output directory");
  cmd->add_option("--format", rc.format, "output format")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--threads", rc.threads, "worker thread cap");
}

void add_sampler(CLI::App* cmd, RunConfig& rc) {
  cmd->add_option("--iters", rc.iters, "MCMC iterations");
  cmd->add_option("--burnin", rc.burnin, "burn-in iterations");
  cmd->add_option("--thin", rc.thin, "thinning factor");
  cmd->add_option("--model", rc.model, "initial model bitstring");
  cmd->add_flag("--fix-model", rc.fix_model, "freeze the model (diagnostics)");
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig rc;
  CLI::App app{"Bayesian variable selection with mixtures of g-priors"};
  app.require_subcommand(1);

  auto* c_enum = app.add_subcommand("enumerate", "full model-space enumeration");
  add_common(c_enum, rc, true);
  c_enum->add_option("--top", rc.top, "truncate the table to the top K models");

  auto* c_mc3 = app.add_subcommand("mc3", "model-composition chain on gamma");
  add_common(c_mc3, rc, true);
  add_sampler(c_mc3, rc);
  auto* c_mc3g = app.add_subcommand("mc3g", "model chain conditional on sampled g");
  add_common(c_mc3g, rc, true);
  add_sampler(c_mc3g, rc);
  auto* c_gibbs = app.add_subcommand("gibbs", "full-parameter Gibbs variable selection");
  add_common(c_gibbs, rc, true);
  add_sampler(c_gibbs, rc);

  auto* c_pred = app.add_subcommand("predict", "model-averaged point prediction");
  add_common(c_pred, rc, true);
  c_pred->add_option("--newdata", rc.newdata, "CSV of new covariate rows")->required();

  auto* c_lps = app.add_subcommand("lps", "cross-validated log predictive score");
  add_common(c_lps, rc, true);
  add_sampler(c_lps, rc);
  c_lps->add_option("--folds", rc.folds, "number of folds");
  c_lps->add_option("--engine", rc.engine, "scoring engine")
      ->check(CLI::IsMember({"enumeration", "gibbs"}));

  auto* c_sim = app.add_subcommand("simulate", "seeded simulation scenarios");
  add_common(c_sim, rc, false);
  c_sim->add_option("--scenario", rc.scenario, "scenario number")->check(CLI::IsMember({1, 2}));
  c_sim->add_option("--n", rc.n, "observations per replicate");
  c_sim->add_option("--p", rc.p, "number of covariates");
  c_sim->add_option("--replicates", rc.replicates, "replicate count");

  auto* c_shr = app.add_subcommand("shrinkage", "prior/posterior shrinkage summaries");
  add_common(c_shr, rc, true);
  c_shr->add_option("--model", rc.model, "model bitstring");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  rc.command = app.get_subcommands().front()->get_name();
  const auto t0 = std::chrono::steady_clock::now();
  Artifacts art(rc.out);
  try {
    int rv = 0;
    if (rc.command == "enumerate") rv = run_enumerate(rc, art);
    else if (rc.command == "mc3") rv = run_sampler_cmd(rc, art, pep::Algorithm::MC3);
    else if (rc.command == "mc3g") rv = run_sampler_cmd(rc, art, pep::Algorithm::MC3GivenG);
    else if (rc.command == "gibbs") rv = run_sampler_cmd(rc, art, pep::Algorithm::GibbsVS);
    else if (rc.command == "predict") rv = run_predict(rc, art);
    else if (rc.command == "lps") rv = run_lps(rc, art);
    else if (rc.command == "simulate") rv = run_simulate(rc, art);
    else if (rc.command == "shrinkage") rv = run_shrinkage(rc, art);
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0).count();
    write_runlog(art, ms);
    return rv;
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    art.remove_all();
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    art.remove_all();
    return 1;
  }
}
