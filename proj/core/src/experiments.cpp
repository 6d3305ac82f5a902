#include "lfi/experiments.hpp"

#include "lfi/abc.hpp"
#include "lfi/bil.hpp"
#include "lfi/ii.hpp"
#include "lfi/io.hpp"
#include "lfi/models.hpp"
#include "lfi/reverse_sampler.hpp"
#include "lfi/spatial.hpp"
#include "lfi/stats.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <numeric>

namespace fs = std::filesystem;
using nlohmann::json;

namespace lfi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Top-level noise roots: 0 drives the algorithm, 1 the synthetic observation,
// 2 auxiliary constructions such as lookup tables.
NoiseSeed algo_root(std::uint64_t seed) { return NoiseSeed{seed, 0}; }
NoiseSeed obs_root(std::uint64_t seed) { return NoiseSeed{seed, 1}; }
NoiseSeed side_root(std::uint64_t seed) { return NoiseSeed{seed, 2}; }

std::string hex16(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct Outputs {
  const RunRequest& req;
  std::uint64_t config_hash;
  std::vector<std::string> written;
  json diag;

  explicit Outputs(const RunRequest& r) : req(r), config_hash(fnv1a64(r.config.text())) {
    fs::create_directories(req.output_dir);
    diag["schema"] = 1;
    diag["experiment"] = req.experiment;
    diag["seed"] = req.seed;
    diag["config_hash"] = hex16(config_hash);
    diag["threads"] = req.threads;
  }

  std::string path(const std::string& rel) const { return req.output_dir + "/" + rel; }

  void samples(const std::vector<WeightedSample>& s,
               const std::vector<std::pair<std::string, std::vector<double>>>& extras = {}) {
    SamplesMeta meta{req.experiment, req.seed, config_hash};
    std::string p = path("samples.csv");
    write_samples_csv(p, s, meta, extras);
    written.push_back(p);
  }

  void table(const std::string& rel, const std::vector<std::string>& columns,
             const std::vector<std::vector<double>>& rows) {
    std::string p = path(rel);
    fs::create_directories(fs::path(p).parent_path());
    write_table_csv(p, columns, rows);
    written.push_back(p);
  }

  void flush_diag(double wall_seconds) {
    diag["wall_seconds"] = wall_seconds;
    std::string p = path("diagnostics.json");
    write_text_file(p, diag.dump(2) + "\n");
    written.push_back(p);
  }

  void cleanup() {
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
  }
};

std::vector<double> theta_column(const std::vector<WeightedSample>& s, int j) {
  std::vector<double> v;
  v.reserve(s.size());
  for (const auto& w : s) v.push_back(w.theta.values[j]);
  return v;
}

std::vector<double> weight_column(const std::vector<WeightedSample>& s) {
  std::vector<double> v;
  v.reserve(s.size());
  for (const auto& w : s) v.push_back(w.weight);
  return v;
}

json marginal_summary(const std::vector<double>& v, const std::vector<double>& w) {
  json m;
  m["mean"] = weighted_mean(v, w);
  m["sd"] = weighted_sd(v, w);
  m["q05"] = weighted_quantile(v, w, 0.05);
  m["q50"] = weighted_quantile(v, w, 0.50);
  m["q95"] = weighted_quantile(v, w, 0.95);
  return m;
}

std::vector<std::vector<double>> kde_rows(const std::vector<double>& v,
                                          const std::vector<double>& w, int points) {
  double s = weighted_sd(v, w);
  double lo = *std::min_element(v.begin(), v.end());
  double hi = *std::max_element(v.begin(), v.end());
  double pad = s > 0.0 ? s : 1.0;
  DensityGrid g = kde_grid(v, w, lo - pad, hi + pad, points);
  std::vector<std::vector<double>> rows;
  rows.reserve(g.x.size());
  for (std::size_t i = 0; i < g.x.size(); ++i) rows.push_back({g.x[i], g.density[i]});
  return rows;
}

// Rejection with a keep-fraction threshold instead of a fixed h.  Stream
// layout matches abc_rejection so a fixed-h rerun sees the same draws.
struct KeepResult {
  std::vector<WeightedSample> samples;
  double h = kInf;
  int proposed = 0;
};

KeepResult rejection_keep(const PriorBox& prior, const Simulator& model,
                          const DiscrepancyFn& disc, int M, double keep_fraction,
                          NoiseSeed root) {
  if (M < 1) throw ConfigError("proposal count must be positive");
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0))
    throw ConfigError("keep fraction must lie in (0, 1]");

  RngStream draws(child_seed(root, 0));
  std::vector<WeightedSample> all;
  all.reserve(M);
  for (int i = 0; i < M; ++i) {
    Vector theta = prior.sample(draws);
    Dataset y = model(theta, child_seed(root, 1 + static_cast<std::uint64_t>(i)));
    all.push_back(WeightedSample{ParameterVector(theta), 1.0, disc(y), i});
  }

  std::vector<int> order(all.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return all[a].discrepancy < all[b].discrepancy; });
  int keep = std::max<int>(1, static_cast<int>(keep_fraction * M));

  KeepResult out;
  out.proposed = M;
  std::vector<int> chosen(order.begin(), order.begin() + keep);
  std::sort(chosen.begin(), chosen.end());
  for (int idx : chosen) {
    out.samples.push_back(all[idx]);
    out.h = std::max(out.h == kInf ? -kInf : out.h, all[idx].discrepancy);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Normal location toy pieces.

std::vector<NormalSummary> summary_selector(const std::string& name) {
  if (name == "mean") return {NormalSummary::mean};
  if (name == "mean_median") return {NormalSummary::mean, NormalSummary::median};
  if (name == "all5")
    return {NormalSummary::mean, NormalSummary::median, NormalSummary::min, NormalSummary::max,
            NormalSummary::midrange};
  throw ConfigError("unknown summary set: " + name);
}

Simulator normal_simulator(int N) {
  return [N](const Vector& theta, NoiseSeed seed) {
    return simulate_normal(NormalLocationConfig{N, theta[0]}, seed);
  };
}

void run_toy_rs(const RunRequest& req, Outputs& out) {
  const ConfigFile& cfg = req.config;
  cfg.restrict_sections({"", "run", "model", "rs"});
  cfg.restrict_keys("model", {"n_obs", "mu_true"});
  cfg.restrict_keys("rs", {"draws", "summaries", "keep_fraction", "adjust", "prior_lo",
                           "prior_hi", "kde_points"});

  const int N = static_cast<int>(cfg.get_int("model", "n_obs", 100));
  const double mu_true = cfg.get_num("model", "mu_true", 0.0);
  const int M = static_cast<int>(cfg.get_int("rs", "draws", 2000));
  const std::string summaries = cfg.get_str("rs", "summaries", "mean");
  const double keep = cfg.get_num("rs", "keep_fraction", 1.0);
  const bool adjust = cfg.get_bool("rs", "adjust", false);
  const double prior_lo = cfg.get_num("rs", "prior_lo", -10.0);
  const double prior_hi = cfg.get_num("rs", "prior_hi", 10.0);
  const int kde_points = static_cast<int>(cfg.get_int("rs", "kde_points", 256));

  Dataset y_obs = simulate_normal(NormalLocationConfig{N, mu_true}, child_seed(obs_root(req.seed), 0));
  auto selector = summary_selector(summaries);
  SummaryStatistic s_obs = summarize_normal(y_obs, selector);
  const double obs_mean = mean(y_obs);

  RsProblem prob;
  prob.model = normal_simulator(N);
  prob.summary = [selector](const Dataset& y) { return summarize_normal(y, selector).values; };
  prob.s_obs = s_obs.values;
  prob.prior = PriorBox{Vector::Constant(1, prior_lo), Vector::Constant(1, prior_hi)};
  prob.theta_init = Vector::Constant(1, obs_mean);

  std::vector<RsDraw> draws = rs_sample(prob, M, algo_root(req.seed));
  RsKept kept = rs_threshold(draws, keep);
  std::vector<WeightedSample> samples =
      adjust ? regression_adjust(kept, prob.s_obs) : kept.samples;
  out.samples(samples);

  auto vals = theta_column(samples, 0);
  auto ws = weight_column(samples);
  out.table("grids/posterior_kde.csv", {"theta_1", "density"}, kde_rows(vals, ws, kde_points));

  int solved = 0;
  for (const auto& d : draws) solved += d.converged ? 1 : 0;

  const double exact_sd = 1.0 / std::sqrt(static_cast<double>(N));
  out.diag["draws"] = M;
  out.diag["kept"] = static_cast<int>(samples.size());
  out.diag["h"] = kept.h;
  out.diag["converged_draws"] = solved;
  out.diag["posterior"]["theta_1"] = marginal_summary(vals, ws);
  out.diag["exact"]["mean"] = obs_mean;
  out.diag["exact"]["sd"] = exact_sd;
  out.diag["ks_vs_exact"] = ks_statistic_weighted(
      vals, ws, [&](double x) { return normal_cdf((x - obs_mean) / exact_sd); });
}

void run_ii_demo(const RunRequest& req, Outputs& out) {
  const ConfigFile& cfg = req.config;
  cfg.restrict_sections({"", "run", "model", "ii"});
  cfg.restrict_keys("model", {"n_obs", "mu_true"});
  cfg.restrict_keys("ii", {"n", "method", "theta_lo", "theta_hi"});

  const int N = static_cast<int>(cfg.get_int("model", "n_obs", 100));
  const double mu_true = cfg.get_num("model", "mu_true", 0.0);
  const int n = static_cast<int>(cfg.get_int("ii", "n", 1000));
  const std::string method = cfg.get_str("ii", "method", "all");
  const double lo = cfg.get_num("ii", "theta_lo", -10.0);
  const double hi = cfg.get_num("ii", "theta_hi", 10.0);

  Dataset y_obs = simulate_normal(NormalLocationConfig{N, mu_true}, child_seed(obs_root(req.seed), 0));
  AuxModelSpec aux = gaussian_mean_aux();
  AuxParameter phi_obs = aux_fit(aux, y_obs, Vector::Constant(1, mean(y_obs)));

  IIProblem prob;
  prob.model = normal_simulator(N);
  prob.spec = aux;
  prob.phi_obs = phi_obs;
  prob.n = n;
  prob.W = aux_obs_info(aux, y_obs, phi_obs.values);
  prob.theta_lo = Vector::Constant(1, lo);
  prob.theta_hi = Vector::Constant(1, hi);

  NoiseSeed xi = child_seed(algo_root(req.seed), 0);
  Vector theta_init = phi_obs.values;

  std::vector<std::string> methods;
  if (method == "all")
    methods = {"wald", "sqml", "emm"};
  else if (method == "wald" || method == "sqml" || method == "emm")
    methods = {method};
  else
    throw ConfigError("unknown estimator: " + method);

  std::vector<WeightedSample> rows;
  for (std::size_t k = 0; k < methods.size(); ++k) {
    const std::string& m = methods[k];
    IIResult r;
    if (m == "wald")
      r = ii_wald(prob, theta_init, xi);
    else if (m == "sqml")
      r = ii_sqml(prob, y_obs, theta_init, xi);
    else
      r = ii_emm(prob, WeightMatrix::identity(1), theta_init, xi);

    rows.push_back(WeightedSample{ParameterVector(r.theta), 1.0, r.objective,
                                  static_cast<std::int64_t>(k)});
    out.diag["estimates"][m]["theta"] = r.theta[0];
    out.diag["estimates"][m]["objective"] = r.objective;
    out.diag["estimates"][m]["converged"] = r.converged;
    out.diag["estimates"][m]["evals"] = static_cast<int>(r.trace.size());

    std::vector<std::vector<double>> trace;
    trace.reserve(r.trace.size());
    for (std::size_t i = 0; i < r.trace.size(); ++i)
      trace.push_back({static_cast<double>(i), r.trace[i].first[0], r.trace[i].second});
    out.table("grids/trace_" + m + ".csv", {"step", "theta_1", "objective"}, trace);
  }
  out.samples(rows);
  out.diag["y_obs_mean"] = mean(y_obs);
  out.diag["n"] = n;
}

// ---------------------------------------------------------------------------
// Synthetic epidemic pieces.

struct EpidemicSetup {
  SIConfig truth;
  double nugget = 0.25;
  double ode_step = 0.05;
  double assumed_i0 = 1.0;
  PriorBox prior;  // on (log beta, log gamma)
  EpidemicPath obs_path;
  Dataset y_obs;
  double final_obs = 0.0;
  int obs_scan_index = 0;
  AuxModelSpec aux;
  AuxParameter phi_obs;
  Simulator sim;
};

EpidemicSetup epidemic_setup(const ConfigFile& cfg, std::uint64_t seed) {
  cfg.restrict_keys("model", {"beta_true", "gamma_true", "s0", "i0", "t_end", "obs_final_lo",
                              "obs_final_hi", "assumed_initial_infected"});
  cfg.restrict_keys("aux", {"nugget", "ode_step"});
  cfg.restrict_keys("prior", {"beta_lo", "beta_hi", "gamma_lo", "gamma_hi"});

  EpidemicSetup s;
  s.truth.beta = cfg.get_num("model", "beta_true", 1e-3);
  s.truth.gamma = cfg.get_num("model", "gamma_true", 0.1);
  s.truth.S0 = static_cast<int>(cfg.get_int("model", "s0", 118));
  s.truth.I0 = static_cast<int>(cfg.get_int("model", "i0", 1));
  s.truth.T_end = cfg.get_num("model", "t_end", 76.0);
  s.nugget = cfg.get_num("aux", "nugget", 0.25);
  s.ode_step = cfg.get_num("aux", "ode_step", 0.05);
  s.assumed_i0 = cfg.get_num("model", "assumed_initial_infected", 1.0);

  const double beta_lo = cfg.get_num("prior", "beta_lo", 1e-5);
  const double beta_hi = cfg.get_num("prior", "beta_hi", 1e-2);
  const double gamma_lo = cfg.get_num("prior", "gamma_lo", 1e-2);
  const double gamma_hi = cfg.get_num("prior", "gamma_hi", 1.0);
  if (!(beta_lo > 0.0 && beta_lo < beta_hi) || !(gamma_lo > 0.0 && gamma_lo < gamma_hi))
    throw ConfigError("epidemic prior bounds must be positive and ordered");
  s.prior.lo = Vector(2);
  s.prior.hi = Vector(2);
  s.prior.lo << std::log(beta_lo), std::log(gamma_lo);
  s.prior.hi << std::log(beta_hi), std::log(gamma_hi);

  // Scan the observation stream for an outbreak whose final count lands in
  // the requested window; extinct or runaway paths are skipped.
  const int win_lo = static_cast<int>(cfg.get_int("model", "obs_final_lo", 85));
  const int win_hi = static_cast<int>(cfg.get_int("model", "obs_final_hi", 95));
  if (win_lo > win_hi) throw ConfigError("observation window is empty");
  NoiseSeed obs = obs_root(seed);
  int k = 0;
  for (; k < 1000; ++k) {
    EpidemicPath path = simulate_si(s.truth, child_seed(obs, static_cast<std::uint64_t>(k)));
    int final_count = path.daily_obs.back();
    if (final_count >= win_lo && final_count <= win_hi) {
      s.obs_path = std::move(path);
      break;
    }
  }
  if (k == 1000) throw ConfigError("no synthetic epidemic hits the observation window");
  s.obs_scan_index = k;
  s.y_obs = epidemic_dataset(s.obs_path);
  s.final_obs = static_cast<double>(s.obs_path.daily_obs.back());

  s.aux = lna_aux(s.nugget, s.ode_step, s.assumed_i0);
  Vector init(2);
  for (int j = 0; j < 2; ++j)
    init[j] = std::exp(0.5 * (std::log(s.aux.box_lo[j]) + std::log(s.aux.box_hi[j])));
  s.phi_obs = aux_fit(s.aux, s.y_obs, init);

  SIConfig truth = s.truth;
  s.sim = [truth](const Vector& theta, NoiseSeed seed_) {
    SIConfig c = truth;
    c.beta = std::exp(theta[0]);
    c.gamma = std::exp(theta[1]);
    return epidemic_dataset(simulate_si(c, seed_));
  };
  return s;
}

DiscrepancyFn make_epidemic_disc(const EpidemicSetup& s, const std::string& kind,
                                 bool identity_j) {
  if (kind == "final") {
    double f = s.final_obs;
    return [f](const Dataset& y) { return std::abs(y.back() - f); };
  }
  AuxModelSpec aux = s.aux;
  AuxParameter phi_obs = s.phi_obs;
  if (kind == "is") {
    if (identity_j) {
      return [aux, phi_obs](const Dataset& y) {
        return disc_is(aux, y, phi_obs, WeightMatrix::identity(2), true);
      };
    }
    WeightMatrix J = aux_obs_info(aux, s.y_obs, phi_obs.values);
    return [aux, phi_obs, J](const Dataset& y) { return disc_is(aux, y, phi_obs, J, false); };
  }
  if (kind == "ip") {
    WeightMatrix J = aux_obs_info(aux, s.y_obs, phi_obs.values);
    return [aux, phi_obs, J](const Dataset& y) {
      AuxParameter phi_y = aux_fit(aux, y, phi_obs.values);
      return disc_ip(phi_y, phi_obs, J);
    };
  }
  if (kind == "il") {
    Dataset y_obs = s.y_obs;
    return [aux, phi_obs, y_obs](const Dataset& y) {
      AuxParameter phi_y = aux_fit(aux, y, phi_obs.values);
      return disc_il(aux, y_obs, phi_y, phi_obs);
    };
  }
  throw ConfigError("unknown discrepancy: " + kind);
}

void epidemic_common_diag(const EpidemicSetup& s, Outputs& out) {
  out.diag["final_obs"] = s.final_obs;
  out.diag["obs_scan_index"] = s.obs_scan_index;
  out.diag["phi_obs"] = {s.phi_obs.values[0], s.phi_obs.values[1]};
  out.diag["phi_obs_converged"] = s.phi_obs.converged;
}

void epidemic_posterior_diag(const std::vector<WeightedSample>& samples, Outputs& out,
                             bool with_mcse) {
  auto w = weight_column(samples);
  const char* names[2] = {"log_beta", "log_gamma"};
  for (int j = 0; j < 2; ++j) {
    auto v = theta_column(samples, j);
    out.diag["posterior"][names[j]] = marginal_summary(v, w);
    if (with_mcse) out.diag["posterior"][names[j]]["mcse"] = batch_means_mcse(v);
  }
}

Vector epidemic_theta0(const ConfigFile& cfg, const std::string& section,
                       const EpidemicSetup& s) {
  Vector theta0(2);
  theta0[0] = cfg.get_num(section, "theta0_log_beta", std::log(s.truth.beta));
  theta0[1] = cfg.get_num(section, "theta0_log_gamma", std::log(s.truth.gamma));
  return theta0;
}

Matrix epidemic_proposal(const ConfigFile& cfg, const std::string& section) {
  Matrix chol = Matrix::Zero(2, 2);
  chol(0, 0) = cfg.get_num(section, "prop_sd_log_beta", 0.2);
  chol(1, 1) = cfg.get_num(section, "prop_sd_log_gamma", 0.2);
  if (chol(0, 0) <= 0.0 || chol(1, 1) <= 0.0)
    throw ConfigError("proposal deviations must be positive");
  return chol;
}

void epidemic_kde_tables(const std::vector<WeightedSample>& samples, Outputs& out) {
  auto w = weight_column(samples);
  out.table("grids/kde_log_beta.csv", {"log_beta", "density"},
            kde_rows(theta_column(samples, 0), w, 256));
  out.table("grids/kde_log_gamma.csv", {"log_gamma", "density"},
            kde_rows(theta_column(samples, 1), w, 256));
}

void run_epidemic_abc(const RunRequest& req, Outputs& out) {
  const ConfigFile& cfg = req.config;
  cfg.restrict_sections({"", "run", "model", "aux", "prior", "abc"});
  cfg.restrict_keys("abc", {"sampler", "disc", "identity_j", "T", "M", "h", "keep_fraction",
                            "prop_sd_log_beta", "prop_sd_log_gamma", "theta0_log_beta",
                            "theta0_log_gamma", "burn_frac"});

  EpidemicSetup s = epidemic_setup(cfg, req.seed);
  const std::string kind = cfg.get_str("abc", "disc", "is");
  const bool identity_j = cfg.get_bool("abc", "identity_j", true);
  DiscrepancyFn disc = make_epidemic_disc(s, kind, identity_j);
  const std::string sampler = cfg.get_str("abc", "sampler", "mcmc");

  epidemic_common_diag(s, out);
  out.diag["disc"] = kind;

  if (sampler == "mcmc") {
    McmcOptions opt;
    opt.T = static_cast<int>(cfg.get_int("abc", "T", 20000));
    opt.theta0 = epidemic_theta0(cfg, "abc", s);
    opt.proposal_chol = epidemic_proposal(cfg, "abc");
    opt.burn_frac = cfg.get_num("abc", "burn_frac", 0.1);
    const double h = cfg.get_num("abc", "h");

    McmcResult res = abc_mcmc(s.prior, s.sim, disc, h, opt, algo_root(req.seed));
    out.samples(res.samples);
    epidemic_kde_tables(res.samples, out);
    epidemic_posterior_diag(res.samples, out, true);
    out.diag["h"] = h;
    out.diag["accept_rate"] = res.diag.accept_rate;
    out.diag["simulations"] = res.diag.simulations;
  } else if (sampler == "rejection") {
    const int M = static_cast<int>(cfg.get_int("abc", "M", 2000));
    if (cfg.has("abc", "h")) {
      const double h = cfg.get_num("abc", "h");
      RejectionResult res = abc_rejection(s.prior, s.sim, disc, h, M, algo_root(req.seed));
      if (res.samples.empty()) throw NumericError("no acceptances at the requested tolerance");
      out.samples(res.samples);
      epidemic_kde_tables(res.samples, out);
      epidemic_posterior_diag(res.samples, out, false);
      out.diag["h"] = h;
      out.diag["accept_rate"] = res.accept_rate;
    } else {
      const double keep = cfg.get_num("abc", "keep_fraction", 0.05);
      KeepResult res = rejection_keep(s.prior, s.sim, disc, M, keep, algo_root(req.seed));
      out.samples(res.samples);
      epidemic_kde_tables(res.samples, out);
      epidemic_posterior_diag(res.samples, out, false);
      out.diag["h"] = res.h;
      out.diag["accept_rate"] = static_cast<double>(res.samples.size()) / res.proposed;
    }
  } else {
    throw ConfigError("unknown sampler: " + sampler);
  }
}

void run_epidemic_lazy(const RunRequest& req, Outputs& out) {
  const ConfigFile& cfg = req.config;
  cfg.restrict_sections({"", "run", "model", "aux", "prior", "abc", "lazy"});
  cfg.restrict_keys("abc", {"disc", "identity_j", "T", "h", "prop_sd_log_beta",
                            "prop_sd_log_gamma", "theta0_log_beta", "theta0_log_gamma",
                            "burn_frac"});
  cfg.restrict_keys("lazy", {"h_lazy", "alpha"});

  EpidemicSetup s = epidemic_setup(cfg, req.seed);
  const std::string kind = cfg.get_str("abc", "disc", "is");
  const bool identity_j = cfg.get_bool("abc", "identity_j", true);
  DiscrepancyFn disc = make_epidemic_disc(s, kind, identity_j);

  LazyConfig lazy;
  lazy.h_lazy = cfg.get_num("lazy", "h_lazy", 20.0);
  lazy.alpha = cfg.get_num("lazy", "alpha", 0.1);
  lazy.lazy_disc = make_epidemic_disc(s, "final", true);

  McmcOptions opt;
  opt.T = static_cast<int>(cfg.get_int("abc", "T", 20000));
  opt.theta0 = epidemic_theta0(cfg, "abc", s);
  opt.proposal_chol = epidemic_proposal(cfg, "abc");
  opt.burn_frac = cfg.get_num("abc", "burn_frac", 0.1);
  const double h = cfg.get_num("abc", "h");

  McmcResult res = abc_mcmc_lazy(s.prior, s.sim, disc, h, lazy, opt, algo_root(req.seed));

  const int burn = static_cast<int>(opt.burn_frac * opt.T);
  std::vector<double> c_post;
  c_post.reserve(res.samples.size());
  for (std::size_t k = 0; k < res.samples.size(); ++k)
    c_post.push_back(res.C_trace[burn + k]);
  out.samples(res.samples, {{"C", c_post}});

  std::vector<std::vector<double>> c_rows;
  c_rows.reserve(res.C_trace.size());
  for (std::size_t i = 0; i < res.C_trace.size(); ++i)
    c_rows.push_back({static_cast<double>(i), res.C_trace[i]});
  out.table("grids/c_trace.csv", {"iter", "C"}, c_rows);
  epidemic_kde_tables(res.samples, out);

  epidemic_common_diag(s, out);
  epidemic_posterior_diag(res.samples, out, true);
  out.diag["disc"] = kind;
  out.diag["h"] = h;
  out.diag["h_lazy"] = lazy.h_lazy;
  out.diag["alpha"] = lazy.alpha;
  out.diag["accept_rate"] = res.diag.accept_rate;
  out.diag["skip_fraction"] = res.diag.skip_fraction;
  out.diag["simulations"] = res.diag.simulations;
  out.diag["expensive_evals"] = res.diag.expensive_evals;
}

void run_epidemic_lna_direct(const RunRequest& req, Outputs& out) {
  const ConfigFile& cfg = req.config;
  cfg.restrict_sections({"", "run", "model", "aux", "prior", "mcmc"});
  cfg.restrict_keys("mcmc", {"T", "prop_sd_log_beta", "prop_sd_log_gamma", "theta0_log_beta",
                             "theta0_log_gamma", "burn_frac"});

  EpidemicSetup s = epidemic_setup(cfg, req.seed);
  const int T = static_cast<int>(cfg.get_int("mcmc", "T", 20000));
  Vector theta0 = epidemic_theta0(cfg, "mcmc", s);
  Matrix chol = epidemic_proposal(cfg, "mcmc");
  const double burn_frac = cfg.get_num("mcmc", "burn_frac", 0.1);
  if (!(burn_frac >= 0.0 && burn_frac < 1.0))
    throw ConfigError("burn-in fraction must lie in [0, 1)");
  if (!s.prior.inside(theta0)) throw ConfigError("initial state outside the prior support");

  auto loglik = [&s](const Vector& theta) {
    LNAAuxSpec a{std::exp(theta[0]), std::exp(theta[1]), s.nugget, s.ode_step, s.assumed_i0};
    return lna_loglik(a, s.y_obs);
  };

  RngStream walk(child_seed(algo_root(req.seed), 0));
  Vector theta = theta0;
  double cur = loglik(theta);
  if (std::isnan(cur)) throw NumericError("likelihood returned NaN at the initial state");

  std::vector<Vector> chain;
  std::vector<double> ll_trace;
  chain.reserve(T);
  ll_trace.reserve(T);
  int accepted = 0;
  for (int i = 0; i < T; ++i) {
    Vector step(2);
    for (int j = 0; j < 2; ++j) step[j] = walk.normal();
    Vector prop = theta + chol * step;
    double u = walk.uniform01();
    if (s.prior.inside(prop)) {
      double cand = loglik(prop);
      if (std::isnan(cand)) throw NumericError("likelihood returned NaN");
      if (std::log(u) < cand - cur) {
        theta = prop;
        cur = cand;
        ++accepted;
      }
    }
    chain.push_back(theta);
    ll_trace.push_back(cur);
  }

  const int burn = static_cast<int>(burn_frac * T);
  std::vector<WeightedSample> samples;
  samples.reserve(T - burn);
  for (int i = burn; i < T; ++i)
    samples.push_back(WeightedSample{ParameterVector(chain[i]), 1.0, ll_trace[i], i});
  out.samples(samples);
  epidemic_kde_tables(samples, out);

  epidemic_common_diag(s, out);
  epidemic_posterior_diag(samples, out, true);
  out.diag["accept_rate"] = static_cast<double>(accepted) / T;
}

void run_pdbil_toy(const RunRequest& req, Outputs& out) {
  const ConfigFile& cfg = req.config;
  cfg.restrict_sections({"", "run", "model", "prior", "bil"});
  cfg.restrict_keys("model", {"n_obs", "mu_true"});
  cfg.restrict_keys("prior", {"lo", "hi"});
  cfg.restrict_keys("bil", {"n", "T", "prop_sd", "burn_frac", "form", "use_lookup",
                            "lookup_knots"});

  const int N = static_cast<int>(cfg.get_int("model", "n_obs", 100));
  const double mu_true = cfg.get_num("model", "mu_true", 0.0);
  const double lo = cfg.get_num("prior", "lo", -10.0);
  const double hi = cfg.get_num("prior", "hi", 10.0);

  PdbilOptions opt;
  opt.n = static_cast<int>(cfg.get_int("bil", "n", 1));
  opt.T = static_cast<int>(cfg.get_int("bil", "T", 10000));
  opt.burn_frac = cfg.get_num("bil", "burn_frac", 0.1);
  const double prop_sd = cfg.get_num("bil", "prop_sd", 0.5);
  if (prop_sd <= 0.0) throw ConfigError("proposal deviation must be positive");
  opt.proposal_chol = Matrix::Constant(1, 1, prop_sd);
  const std::string form = cfg.get_str("bil", "form", "pooled");
  if (form == "pooled")
    opt.form = BindingForm::pooled;
  else if (form == "mean_of_fits")
    opt.form = BindingForm::mean_of_fits;
  else
    throw ConfigError("unknown binding form: " + form);

  Dataset y_obs = simulate_normal(NormalLocationConfig{N, mu_true}, child_seed(obs_root(req.seed), 0));
  AuxModelSpec aux = gaussian_mean_aux();
  Simulator model = normal_simulator(N);
  PriorBox prior{Vector::Constant(1, lo), Vector::Constant(1, hi)};
  opt.theta0 = Vector::Constant(1, mean(y_obs));

  BindingLookup lookup;
  const bool use_lookup = cfg.get_bool("bil", "use_lookup", false);
  if (use_lookup) {
    const int K = static_cast<int>(cfg.get_int("bil", "lookup_knots", 41));
    if (K < 2) throw ConfigError("lookup needs two or more knots");
    Vector knots(K);
    for (int k = 0; k < K; ++k)
      knots[k] = lo + (hi - lo) * static_cast<double>(k) / (K - 1);
    lookup = build_binding_lookup(model, aux, opt.n, knots, side_root(req.seed),
                                  Vector::Constant(1, mean(y_obs)), opt.form);
    opt.lookup = &lookup;

    std::vector<std::vector<double>> rows;
    rows.reserve(K);
    for (int k = 0; k < K; ++k) rows.push_back({lookup.knots[k], lookup.phi(k, 0)});
    out.table("grids/binding_lookup.csv", {"theta_1", "phi_1"}, rows);
  }

  PdbilResult res = pdbil_mcmc(prior, model, aux, y_obs, opt, algo_root(req.seed));
  out.samples(res.samples);

  auto v = theta_column(res.samples, 0);
  auto w = weight_column(res.samples);
  out.table("grids/posterior_kde.csv", {"theta_1", "density"}, kde_rows(v, w, 256));

  out.diag["n"] = opt.n;
  out.diag["accept_rate"] = res.accept_rate;
  out.diag["fit_failures"] = res.fit_failures;
  out.diag["use_lookup"] = use_lookup;
  out.diag["posterior"]["theta_1"] = marginal_summary(v, w);
  out.diag["posterior"]["theta_1"]["mcse"] = batch_means_mcse(v);
  out.diag["exact"]["mean"] = mean(y_obs);
  out.diag["exact"]["sd"] = std::sqrt((1.0 + 1.0 / opt.n) / N);
}

// ---------------------------------------------------------------------------
// Spatial extremes pieces.

struct SpatialSetup {
  SpatialLayout layout;
  int T = 0;
  double c1 = 1.0;
  double c2_true = 0.0;
  double nu_true = 0.0;
  double eps_bound = 5.0;
  PriorBox prior;
  FrechetPanel panel_obs;
  Simulator sim;
};

SpatialSetup spatial_setup(const ConfigFile& cfg, std::uint64_t seed) {
  cfg.restrict_keys("model", {"sites", "layout", "extent", "nx", "ny", "spacing", "t_reps",
                              "c1", "c2_true", "nu_true", "layout_seed", "eps_bound"});
  cfg.restrict_keys("prior", {"lo", "hi"});

  SpatialSetup s;
  const std::string kind = cfg.get_str("model", "layout", "random");
  if (kind == "random") {
    const int sites = static_cast<int>(cfg.get_int("model", "sites", 10));
    const double extent = cfg.get_num("model", "extent", 10.0);
    if (sites < 2 || !(extent > 0.0)) throw ConfigError("bad random layout request");
    const std::uint64_t layout_seed = static_cast<std::uint64_t>(cfg.get_int("model", "layout_seed", 42));
    RngStream ls(NoiseSeed{layout_seed, 0});
    s.layout.coords.resize(sites, 2);
    for (int i = 0; i < sites; ++i) {
      s.layout.coords(i, 0) = ls.uniform(0.0, extent);
      s.layout.coords(i, 1) = ls.uniform(0.0, extent);
    }
  } else if (kind == "grid") {
    s.layout = make_grid_layout(static_cast<int>(cfg.get_int("model", "nx", 5)),
                                static_cast<int>(cfg.get_int("model", "ny", 5)),
                                cfg.get_num("model", "spacing", 1.0));
  } else {
    throw ConfigError("unknown layout kind: " + kind);
  }

  s.T = static_cast<int>(cfg.get_int("model", "t_reps", 50));
  s.c1 = cfg.get_num("model", "c1", 1.0);
  s.c2_true = cfg.get_num("model", "c2_true", 5.0);
  s.nu_true = cfg.get_num("model", "nu_true", 1.0);
  s.eps_bound = cfg.get_num("model", "eps_bound", 5.0);

  const double lo = cfg.get_num("prior", "lo", 0.0);
  const double hi = cfg.get_num("prior", "hi", 20.0);
  if (!(lo >= 0.0 && lo < hi)) throw ConfigError("bad spatial prior box");
  s.prior.lo = Vector::Constant(2, lo);
  s.prior.hi = Vector::Constant(2, hi);

  s.panel_obs = simulate_schlather(s.layout, s.c2_true, s.nu_true, s.T,
                                   child_seed(obs_root(seed), 0), s.c1, s.eps_bound);
  SpatialLayout layout = s.layout;
  int T = s.T;
  double c1 = s.c1, eps_bound = s.eps_bound;
  s.sim = [layout, T, c1, eps_bound](const Vector& theta, NoiseSeed seed_) {
    if (theta.size() != 2) throw ConfigError("spatial model takes theta = (range, smoothness)");
    return simulate_schlather(layout, theta[0], theta[1], T, seed_, c1, eps_bound).values;
  };
  return s;
}

void spatial_posterior_diag(const std::vector<WeightedSample>& samples, Outputs& out) {
  auto w = weight_column(samples);
  auto c2 = theta_column(samples, 0);
  auto nu = theta_column(samples, 1);
  out.diag["posterior"]["c2"] = marginal_summary(c2, w);
  out.diag["posterior"]["nu"] = marginal_summary(nu, w);

  double m0 = weighted_mean(c2, w), m1 = weighted_mean(nu, w);
  double total = 0.0, v00 = 0.0, v01 = 0.0, v11 = 0.0;
  for (std::size_t i = 0; i < c2.size(); ++i) {
    total += w[i];
    v00 += w[i] * (c2[i] - m0) * (c2[i] - m0);
    v01 += w[i] * (c2[i] - m0) * (nu[i] - m1);
    v11 += w[i] * (nu[i] - m1) * (nu[i] - m1);
  }
  v00 /= total;
  v01 /= total;
  v11 /= total;
  out.diag["posterior"]["cov_det"] = v00 * v11 - v01 * v01;
}

void run_spatial_abc(const RunRequest& req, Outputs& out, bool use_ec) {
  const ConfigFile& cfg = req.config;
  std::vector<std::string> sections = {"", "run", "model", "prior", "abc"};
  if (use_ec) sections.push_back("ec");
  cfg.restrict_sections(sections);
  cfg.restrict_keys("abc", {"M", "keep_fraction", "fit_box_lo", "fit_box_hi"});
  if (use_ec) cfg.restrict_keys("ec", {"groups"});

  SpatialSetup s = spatial_setup(cfg, req.seed);
  const int M = static_cast<int>(cfg.get_int("abc", "M", 500));
  const double keep = cfg.get_num("abc", "keep_fraction", 0.1);

  DiscrepancyFn disc;
  if (use_ec) {
    const int K = static_cast<int>(cfg.get_int("ec", "groups", 15));
    TripletGroups groups = ec_groups(s.layout, K);
    Vector s_obs = ec_group_summary(s.panel_obs, groups);
    const int T = s.T, Msites = s.layout.size();
    disc = [groups, s_obs, T, Msites](const Dataset& y) {
      Vector sy = ec_group_summary(panel_from_dataset(y, T, Msites), groups);
      return (sy - s_obs).lpNorm<1>();
    };

    std::vector<std::vector<double>> rows;
    for (int g = 0; g < groups.count(); ++g)
      rows.push_back({static_cast<double>(g), static_cast<double>(groups.members[g].size()),
                      s_obs[g]});
    out.table("grids/ec_summary.csv", {"group", "triplets", "observed"}, rows);
    out.diag["groups"] = groups.count();
  } else {
    const double fit_lo = cfg.get_num("abc", "fit_box_lo", 1e-3);
    const double fit_hi = cfg.get_num("abc", "fit_box_hi", 20.0);
    AuxModelSpec aux = composite_likelihood_aux(s.layout, s.T, s.c1, fit_lo, fit_hi);
    Vector init = 0.5 * (aux.box_lo + aux.box_hi);
    AuxParameter phi_obs = aux_fit(aux, s.panel_obs.values, init);
    WeightMatrix J = aux_obs_info(aux, s.panel_obs.values, phi_obs.values);
    disc = [aux, phi_obs, J](const Dataset& y) {
      AuxParameter phi_y = aux_fit(aux, y, phi_obs.values);
      return disc_ip(phi_y, phi_obs, J);
    };
    out.diag["cl_fit"]["c2"] = phi_obs.values[0];
    out.diag["cl_fit"]["nu"] = phi_obs.values[1];
    out.diag["cl_fit"]["converged"] = phi_obs.converged;
  }

  KeepResult res = rejection_keep(s.prior, s.sim, disc, M, keep, algo_root(req.seed));
  out.samples(res.samples);
  spatial_posterior_diag(res.samples, out);
  out.diag["h"] = res.h;
  out.diag["proposed"] = res.proposed;
  out.diag["kept"] = static_cast<int>(res.samples.size());
  out.diag["truth"]["c2"] = s.c2_true;
  out.diag["truth"]["nu"] = s.nu_true;
}

void run_pilot(const RunRequest& req, Outputs& out) {
  const ConfigFile& cfg = req.config;
  cfg.restrict_sections({"", "run", "model", "aux", "prior", "pilot"});
  cfg.restrict_keys("pilot", {"M", "quantile", "disc", "identity_j"});

  EpidemicSetup s = epidemic_setup(cfg, req.seed);
  const int M = static_cast<int>(cfg.get_int("pilot", "M", 500));
  const double q = cfg.get_num("pilot", "quantile", 0.05);
  if (!(q > 0.0 && q < 1.0)) throw ConfigError("pilot quantile must lie in (0, 1)");
  const std::string kind = cfg.get_str("pilot", "disc", "is");
  const bool identity_j = cfg.get_bool("pilot", "identity_j", true);

  DiscrepancyFn disc = make_epidemic_disc(s, kind, identity_j);
  DiscrepancyFn lazy_fn = make_epidemic_disc(s, "final", true);
  std::vector<PilotRow> rows =
      pilot_run(s.prior, s.sim, disc, kInf, lazy_fn, M, algo_root(req.seed));

  std::vector<double> rhos;
  rhos.reserve(rows.size());
  for (const auto& r : rows) rhos.push_back(r.rho);
  const double h = quantile(rhos, q);

  std::vector<WeightedSample> accepted;
  std::vector<Vector> accepted_thetas;
  std::vector<std::vector<double>> table_rows;
  table_rows.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    bool acc = rows[i].rho <= h;
    table_rows.push_back({rows[i].theta[0], rows[i].theta[1], rows[i].rho, rows[i].lazy_value,
                          acc ? 1.0 : 0.0});
    if (acc) {
      accepted.push_back(WeightedSample{ParameterVector(rows[i].theta), 1.0, rows[i].rho,
                                        static_cast<std::int64_t>(i)});
      accepted_thetas.push_back(rows[i].theta);
    }
  }
  out.samples(accepted);
  out.table("grids/pilot.csv", {"log_beta", "log_gamma", "rho", "lazy_value", "accept"},
            table_rows);

  Matrix chol = tune_proposal(accepted_thetas);
  epidemic_common_diag(s, out);
  out.diag["disc"] = kind;
  out.diag["suggested_h"] = h;
  out.diag["accepted"] = static_cast<int>(accepted.size());
  out.diag["proposal_chol"] = {{chol(0, 0), 0.0}, {chol(1, 0), chol(1, 1)}};
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "toy_rs",       "ii_demo",      "epidemic_abc",       "epidemic_lazy",
      "epidemic_lna_direct", "pdbil_toy", "spatial_abc_cp", "spatial_abc_ec",
      "pilot"};
  return names;
}

RunOutcome run_experiment(const RunRequest& req) {
  req.config.require_schema(1);
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), req.experiment) == names.end())
    throw ConfigError("unknown experiment: " + req.experiment);
  if (req.threads < 1) throw ConfigError("thread count must be positive");
  if (req.output_dir.empty()) throw ConfigError("output directory not set");

  req.config.restrict_keys("", {"schema"});
  req.config.restrict_keys("run", {"experiment", "seed", "output", "threads"});
  if (req.config.has("run", "experiment") &&
      req.config.get_str("run", "experiment") != req.experiment)
    throw ConfigError("config section [run] names a different experiment");

  Outputs out(req);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (req.experiment == "toy_rs")
      run_toy_rs(req, out);
    else if (req.experiment == "ii_demo")
      run_ii_demo(req, out);
    else if (req.experiment == "epidemic_abc")
      run_epidemic_abc(req, out);
    else if (req.experiment == "epidemic_lazy")
      run_epidemic_lazy(req, out);
    else if (req.experiment == "epidemic_lna_direct")
      run_epidemic_lna_direct(req, out);
    else if (req.experiment == "pdbil_toy")
      run_pdbil_toy(req, out);
    else if (req.experiment == "spatial_abc_cp")
      run_spatial_abc(req, out, false);
    else if (req.experiment == "spatial_abc_ec")
      run_spatial_abc(req, out, true);
    else
      run_pilot(req, out);
    out.flush_diag(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  } catch (...) {
    out.cleanup();
    throw;
  }
  return RunOutcome{out.written};
}

}  // namespace lfi
