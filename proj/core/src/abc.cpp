#include "lfi/abc.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <utility>

namespace lfi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_prior(const PriorBox& prior) {
  if (prior.lo.size() == 0 || prior.lo.size() != prior.hi.size())
    throw ConfigError("prior box has mismatched bounds");
  for (int j = 0; j < prior.lo.size(); ++j) {
    if (!std::isfinite(prior.lo[j]) || !std::isfinite(prior.hi[j]) || prior.lo[j] >= prior.hi[j])
      throw ConfigError("prior box needs finite lo < hi in every coordinate");
  }
}

double elapsed_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Streams off the root seed.  Proposals and accept tests share one stream so a
// chain's draw sequence is independent of how many simulations get skipped;
// each iteration simulates on its own stream for the same reason.
constexpr std::uint64_t kProposalStream = 0;
constexpr std::uint64_t kCoinStream = 1;
constexpr std::uint64_t kInitSimStream = 2;
constexpr std::uint64_t kSimStreamBase = 3;

McmcResult mcmc_impl(const PriorBox& prior, const Simulator& model, const DiscrepancyFn& disc,
                     double h, const LazyConfig* lazy, const McmcOptions& opt, NoiseSeed root) {
  validate_prior(prior);
  const int p = prior.dim();
  if (opt.T < 1) throw ConfigError("chain length must be positive");
  if (opt.theta0.size() != p) throw ConfigError("initial state dimension mismatch");
  if (!prior.inside(opt.theta0)) throw ConfigError("initial state outside the prior support");
  if (opt.proposal_chol.rows() != p || opt.proposal_chol.cols() != p)
    throw ConfigError("proposal factor dimension mismatch");
  if (!(opt.burn_frac >= 0.0 && opt.burn_frac < 1.0))
    throw ConfigError("burn-in fraction must lie in [0, 1)");
  if (lazy) {
    if (!(lazy->alpha > 0.0 && lazy->alpha <= 1.0))
      throw ConfigError("continuation probability must lie in (0, 1]");
    if (!lazy->lazy_disc) throw ConfigError("lazy discrepancy not set");
  }

  const auto t0 = std::chrono::steady_clock::now();
  RngStream walk(child_seed(root, kProposalStream));
  RngStream coins(child_seed(root, kCoinStream));

  McmcResult out;
  out.full_chain.reserve(opt.T);
  if (lazy) out.C_trace.reserve(opt.T);

  Vector theta = opt.theta0;
  Dataset y0 = model(theta, child_seed(root, kInitSimStream));
  double cur_rho = disc(y0);
  double C = 1.0;

  int accepted = 0;
  int sims = 0;
  int expensive = 0;
  std::vector<double> rho_trace(opt.T, 0.0);

  for (int i = 0; i < opt.T; ++i) {
    Vector step(p);
    for (int j = 0; j < p; ++j) step[j] = walk.normal();
    Vector prop = theta + opt.proposal_chol * step;
    double u = walk.uniform01();

    // Prior-ratio pretest before any simulation; C > 1 repays the inflation a
    // lazily accepted state carried in.
    bool pretest = false;
    if (prior.inside(prop)) {
      double r = std::exp(prior.log_density(prop) - prior.log_density(theta)) / C;
      pretest = u < std::min(1.0, r);
    }

    if (pretest) {
      Dataset y = model(prop, child_seed(root, kSimStreamBase + static_cast<std::uint64_t>(i)));
      ++sims;

      double C_prop = 1.0;
      bool continue_eval = true;
      if (lazy) {
        double rho_lazy = lazy->lazy_disc(y);
        if (rho_lazy > lazy->h_lazy) {
          if (coins.uniform01() < lazy->alpha) {
            C_prop = 1.0 / lazy->alpha;
          } else {
            continue_eval = false;
          }
        }
      }

      if (continue_eval) {
        double rho = disc(y);
        ++expensive;
        if (rho <= h) {
          theta = prop;
          cur_rho = rho;
          C = C_prop;
          ++accepted;
        }
      }
    }

    out.full_chain.push_back(theta);
    rho_trace[i] = cur_rho;
    if (lazy) out.C_trace.push_back(C);
  }

  const int burn = static_cast<int>(opt.burn_frac * opt.T);
  out.samples.reserve(opt.T - burn);
  for (int i = burn; i < opt.T; ++i)
    out.samples.push_back(
        WeightedSample{ParameterVector(out.full_chain[i]), 1.0, rho_trace[i], i});

  out.diag.accept_rate = static_cast<double>(accepted) / opt.T;
  out.diag.simulations = sims;
  out.diag.expensive_evals = expensive;
  out.diag.skip_fraction = sims > 0 ? static_cast<double>(sims - expensive) / sims : 0.0;
  out.diag.wall_seconds = elapsed_seconds(t0);
  return out;
}

}  // namespace

double PriorBox::log_density(const Vector& v) const {
  if (!inside(v)) return -kInf;
  double logvol = 0.0;
  for (int j = 0; j < lo.size(); ++j) logvol += std::log(hi[j] - lo[j]);
  return -logvol;
}

Vector PriorBox::sample(RngStream& rng) const {
  Vector v(lo.size());
  for (int j = 0; j < lo.size(); ++j) v[j] = rng.uniform(lo[j], hi[j]);
  return v;
}

double disc_ip(const AuxParameter& phi_y, const AuxParameter& phi_obs, const WeightMatrix& J_obs) {
  if (phi_y.dim() != phi_obs.dim() || phi_y.dim() != J_obs.dim())
    throw ConfigError("summary dimension mismatch");
  return weighted_norm(phi_y.values - phi_obs.values, J_obs);
}

double disc_il(const AuxModelSpec& spec, const Dataset& y_obs, const AuxParameter& phi_y,
               const AuxParameter& phi_obs) {
  double at_obs = spec.loglik(y_obs, phi_obs.values);
  double at_sim = spec.loglik(y_obs, phi_y.values);
  if (std::isnan(at_obs) || std::isnan(at_sim))
    throw NumericError("non-finite auxiliary likelihood in discrepancy");
  return at_obs - at_sim;
}

double disc_is(const AuxModelSpec& spec, const Dataset& y, const AuxParameter& phi_obs,
               const WeightMatrix& J_obs, bool identity_J) {
  Vector s = aux_score(spec, y, phi_obs.values);
  if (identity_J) return s.norm();
  if (s.size() != J_obs.dim()) throw ConfigError("score dimension mismatch");
  Vector x = J_obs.llt().solve(s);
  return std::sqrt(std::max(0.0, s.dot(x)));
}

RejectionResult abc_rejection(const PriorBox& prior, const Simulator& model,
                              const DiscrepancyFn& disc, double h, int M, NoiseSeed root) {
  validate_prior(prior);
  if (M < 1) throw ConfigError("proposal count must be positive");

  RngStream draws(child_seed(root, 0));
  RejectionResult out;
  out.proposed = M;
  for (int i = 0; i < M; ++i) {
    Vector theta = prior.sample(draws);
    Dataset y = model(theta, child_seed(root, 1 + static_cast<std::uint64_t>(i)));
    double rho = disc(y);
    if (rho <= h) out.samples.push_back(WeightedSample{ParameterVector(theta), 1.0, rho, i});
  }
  out.accept_rate = static_cast<double>(out.samples.size()) / M;
  return out;
}

McmcResult abc_mcmc(const PriorBox& prior, const Simulator& model, const DiscrepancyFn& disc,
                    double h, const McmcOptions& opt, NoiseSeed root) {
  return mcmc_impl(prior, model, disc, h, nullptr, opt, root);
}

McmcResult abc_mcmc_lazy(const PriorBox& prior, const Simulator& model, const DiscrepancyFn& disc,
                         double h, const LazyConfig& lazy, const McmcOptions& opt, NoiseSeed root) {
  return mcmc_impl(prior, model, disc, h, &lazy, opt, root);
}

std::vector<PilotRow> pilot_run(const PriorBox& prior, const Simulator& model,
                                const DiscrepancyFn& disc, double h,
                                const std::function<double(const Dataset&)>& lazy_value, int M,
                                NoiseSeed root) {
  validate_prior(prior);
  if (M < 1) throw ConfigError("pilot size must be positive");
  if (!lazy_value) throw ConfigError("pilot cheap summary not set");

  RngStream draws(child_seed(root, 0));
  std::vector<PilotRow> rows;
  rows.reserve(M);
  for (int i = 0; i < M; ++i) {
    Vector theta = prior.sample(draws);
    Dataset y = model(theta, child_seed(root, 1 + static_cast<std::uint64_t>(i)));
    PilotRow row;
    row.theta = theta;
    row.lazy_value = lazy_value(y);
    row.rho = disc(y);
    row.accept = row.rho <= h;
    rows.push_back(row);
  }
  return rows;
}

Matrix tune_proposal(const std::vector<Vector>& draws, double fallback_sd) {
  if (draws.empty()) throw ConfigError("no draws to tune from");
  const int p = static_cast<int>(draws[0].size());
  const double scale = 2.38 * 2.38 / p;

  Matrix fallback = (2.38 / std::sqrt(static_cast<double>(p))) * fallback_sd *
                    Matrix::Identity(p, p);
  if (draws.size() < 2) return fallback;

  Vector mean = Vector::Zero(p);
  for (const auto& d : draws) mean += d;
  mean /= static_cast<double>(draws.size());
  Matrix cov = Matrix::Zero(p, p);
  for (const auto& d : draws) cov += (d - mean) * (d - mean).transpose();
  cov /= static_cast<double>(draws.size() - 1);

  Eigen::LLT<Matrix> llt(scale * cov);
  if (llt.info() != Eigen::Success) return fallback;
  Matrix L = llt.matrixL();
  if (!L.allFinite() || L.diagonal().minCoeff() <= 0.0) return fallback;
  return L;
}

}  // namespace lfi
