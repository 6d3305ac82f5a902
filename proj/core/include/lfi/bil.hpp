#pragma once

#include "lfi/abc.hpp"
#include "lfi/auxiliary.hpp"

#include <vector>

namespace lfi {

// Piecewise-linear map from a scalar generative parameter to the auxiliary
// parameter, fitted once on a grid and reused inside MCMC in place of
// per-iteration refits.  Evaluation clamps outside the knot range.
struct BindingLookup {
  Vector knots;  // ascending
  Matrix phi;    // one row per knot

  Vector operator()(double theta) const;
};

BindingLookup build_binding_lookup(const Simulator& model, const AuxModelSpec& spec, int n,
                                   const Vector& knots, NoiseSeed xi, const Vector& phi_init,
                                   BindingForm form = BindingForm::pooled,
                                   const FitOptions& fit = {});

struct PdbilOptions {
  int T = 10000;
  int n = 1;  // simulated replicates behind each auxiliary fit
  Vector theta0;
  Matrix proposal_chol;
  double burn_frac = 0.1;
  BindingForm form = BindingForm::pooled;
  FitOptions fit;
  const BindingLookup* lookup = nullptr;  // when set, replaces the refits
};

struct PdbilResult {
  std::vector<WeightedSample> samples;  // post burn-in; discrepancy slot holds the loglik
  std::vector<Vector> full_chain;
  std::vector<double> loglik_trace;
  double accept_rate = 0.0;
  int simulations = 0;
  int fit_failures = 0;
  double wall_seconds = 0.0;
};

// Metropolis-Hastings on the auxiliary likelihood p_A(y_obs | phi_n(theta)).
// The estimate at the proposal is computed from freshly simulated replicates
// and, on acceptance, stored; the current state's value is never recomputed,
// which is what keeps the noisy target a proper marginal one.
PdbilResult pdbil_mcmc(const PriorBox& prior, const Simulator& model, const AuxModelSpec& spec,
                       const Dataset& y_obs, const PdbilOptions& opt, NoiseSeed root);

}  // namespace lfi
