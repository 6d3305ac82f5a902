#pragma once

#include "lfi/auxiliary.hpp"
#include "lfi/rng.hpp"
#include "lfi/types.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace lfi {

// Uniform box prior; every sampler here works on this support.
struct PriorBox {
  Vector lo, hi;

  bool inside(const Vector& v) const {
    for (int j = 0; j < v.size(); ++j)
      if (v[j] < lo[j] || v[j] > hi[j]) return false;
    return true;
  }
  double log_density(const Vector& v) const;
  Vector sample(RngStream& rng) const;
  int dim() const { return static_cast<int>(lo.size()); }
};

// sqrt((phi_y - phi_obs)' J_obs (phi_y - phi_obs)).
double disc_ip(const AuxParameter& phi_y, const AuxParameter& phi_obs, const WeightMatrix& J_obs);

// log p_A(y_obs | phi_obs) - log p_A(y_obs | phi_y); nonnegative when phi_obs
// is the exact MLE for y_obs.
double disc_il(const AuxModelSpec& spec, const Dataset& y_obs, const AuxParameter& phi_y,
               const AuxParameter& phi_obs);

// sqrt(S_A' J_obs^{-1} S_A) with the score of the simulated data evaluated at
// phi_obs.  identity_J drops the weighting (plain Euclidean norm).
double disc_is(const AuxModelSpec& spec, const Dataset& y, const AuxParameter& phi_obs,
               const WeightMatrix& J_obs, bool identity_J = false);

// Discrepancy of one simulated dataset against the observed summary; the
// closure owns phi_obs and friends.
using DiscrepancyFn = std::function<double(const Dataset&)>;

struct RejectionResult {
  std::vector<WeightedSample> samples;
  double accept_rate = 0.0;
  int proposed = 0;
};

// Prior-predictive rejection with the uniform kernel I(rho <= h).  Zero
// acceptances return an empty set (callers see accept_rate == 0).
RejectionResult abc_rejection(const PriorBox& prior, const Simulator& model,
                              const DiscrepancyFn& disc, double h, int M, NoiseSeed root);

struct LazyConfig {
  double h_lazy = 0.0;
  double alpha = 1.0;               // continuation probability in (0, 1]
  DiscrepancyFn lazy_disc;          // cheap discrepancy computed on every simulation
};

struct McmcOptions {
  int T = 10000;
  Vector theta0;
  Matrix proposal_chol;   // lower factor of the random-walk covariance
  double burn_frac = 0.1; // leading fraction dropped from `samples`
};

struct McmcDiagnostics {
  double accept_rate = 0.0;
  double skip_fraction = 0.0;  // skipped expensive summaries / simulations run
  int simulations = 0;
  int expensive_evals = 0;
  double wall_seconds = 0.0;
};

struct McmcResult {
  std::vector<WeightedSample> samples;  // post burn-in, weight 1 each
  std::vector<Vector> full_chain;       // every state, for diagnostics
  std::vector<double> C_trace;          // lazy inflation factor per iteration
  McmcDiagnostics diag;
};

// Metropolis-Hastings on the uniform-kernel ABC target with early rejection:
// the prior ratio is tested before simulating, which leaves the target
// unchanged under the uniform kernel.
McmcResult abc_mcmc(const PriorBox& prior, const Simulator& model, const DiscrepancyFn& disc,
                    double h, const McmcOptions& opt, NoiseSeed root);

// Lazy-summary MCMC: a cheap discrepancy gates the expensive one.  Failing the
// gate continues only with probability alpha (inflating by C = 1/alpha), which
// makes the chain a pseudo-marginal method with the two-point likelihood
// estimator {0 w.p. 1-alpha, I(rho<=h)/alpha w.p. alpha} on the failing branch.
McmcResult abc_mcmc_lazy(const PriorBox& prior, const Simulator& model, const DiscrepancyFn& disc,
                         double h, const LazyConfig& lazy, const McmcOptions& opt, NoiseSeed root);

struct PilotRow {
  Vector theta;
  double lazy_value = 0.0;
  double rho = 0.0;
  bool accept = false;
};

// Prior-predictive pilot: records each simulation's cheap summary value and
// whether the expensive discrepancy passed h.  Used to tune the lazy gate.
std::vector<PilotRow> pilot_run(const PriorBox& prior, const Simulator& model,
                                const DiscrepancyFn& disc, double h,
                                const std::function<double(const Dataset&)>& lazy_value, int M,
                                NoiseSeed root);

// Random-walk covariance from pilot draws: sample covariance scaled by
// 2.38^2 / dim, returned as a lower Cholesky factor.  Degenerate input falls
// back to a diagonal of `fallback_sd`.
Matrix tune_proposal(const std::vector<Vector>& draws, double fallback_sd = 0.1);

}  // namespace lfi
