#pragma once

#include "lfi/models.hpp"
#include "lfi/nelder_mead.hpp"
#include "lfi/rng.hpp"
#include "lfi/types.hpp"

#include <functional>
#include <vector>

namespace lfi {

// Parametric auxiliary model: estimating function Q (usually a log-likelihood)
// with optional analytic score and a fitting box.  fit_on_log_scale optimizes
// over log(phi) internally; Q, score and information all stay on the natural
// phi scale.
struct AuxModelSpec {
  int p_phi = 0;
  std::function<double(const Dataset&, const Vector&)> loglik;
  std::function<Vector(const Dataset&, const Vector&)> analytic_score;  // may be empty
  Vector box_lo, box_hi;
  bool fit_on_log_scale = false;
};

struct FitOptions {
  double diameter_tol = 1e-8;
  int max_evals = 0;  // 0 selects 2000 * p_phi
};

// Maximizes Q over the box by Nelder-Mead with restart-at-best.  The iteration
// cap leaves converged=false but still returns the best point found.
AuxParameter aux_fit(const AuxModelSpec& spec, const Dataset& y, const Vector& phi_init,
                     const FitOptions& opt = {});

// Same, but for the pooled estimating function sum_i Q(y_i; phi).
AuxParameter aux_fit_pooled(const AuxModelSpec& spec, const std::vector<Dataset>& ys,
                            const Vector& phi_init, const FitOptions& opt = {});

// dQ/dphi.  Analytic when supplied, otherwise central differences with step
// max(1e-5, 1e-5 |phi_j|) per coordinate.
Vector aux_score(const AuxModelSpec& spec, const Dataset& y, const Vector& phi);

// Negative Hessian of Q by central second differences, symmetrized, with a
// ridge repair (eps = 1e-8 * max diag, escalating tenfold) when the Cholesky
// fails.  Repair beyond 1e-2 * max diag is an error.
WeightMatrix aux_obs_info(const AuxModelSpec& spec, const Dataset& y, const Vector& phi);

// Gaussian iid auxiliary with known unit variance; phi = (mean).
AuxModelSpec gaussian_mean_aux(double lo = -1e6, double hi = 1e6);

// Gaussian iid auxiliary, phi = (mean, log sd).
AuxModelSpec gaussian_mean_logsd_aux();

enum class BindingForm { pooled, mean_of_fits };

struct BindingEstimate {
  AuxParameter phi_n;
  int n = 0;
  BindingForm form = BindingForm::pooled;
};

using Simulator = std::function<Dataset(const Vector&, NoiseSeed)>;

// phi_n(theta) by fitting the pooled estimating function to n datasets
// simulated on child streams of xi.  Fits initialize at phi_init (by
// convention the observed auxiliary estimate).
BindingEstimate binding_pooled(const Vector& theta, int n, const Simulator& model,
                               const AuxModelSpec& spec, NoiseSeed xi, const Vector& phi_init,
                               const FitOptions& opt = {});

// phi_n(theta) as the average of per-replicate fits.
BindingEstimate binding_mean(const Vector& theta, int n, const Simulator& model,
                             const AuxModelSpec& spec, NoiseSeed xi, const Vector& phi_init,
                             const FitOptions& opt = {});

// Linear noise approximation of the SI model, used as an auxiliary likelihood
// for the daily S+I series.
struct LNAAuxSpec {
  double beta_A = 1e-3;
  double gamma_A = 0.1;
  double nugget = 0.25;    // observation variance floor for the rounded counts
  double ode_step = 0.05;  // RK4 step in days
  double assumed_initial_infected = 1.0;
};

// Gaussian filtering likelihood of the daily observations o_t = S + I.
// Between observations the mean and covariance ODEs integrate by RK4; at each
// day the linear-Gaussian update conditions the covariance while the mean
// continues along its ODE.  The t=0 observation pins the initial state and is
// excluded from the likelihood.  States escaping [0, o_0 + 5] give -inf.
double lna_loglik(const LNAAuxSpec& spec, const Dataset& daily_obs);
double lna_loglik(const LNAAuxSpec& spec, const EpidemicPath& path);

// AuxModelSpec wrapping lna_loglik with phi = (beta_A, gamma_A), fitting box
// [1e-6, 1] x [1e-4, 10], optimized on log scale.
AuxModelSpec lna_aux(double nugget = 0.25, double ode_step = 0.05,
                     double assumed_initial_infected = 1.0);

}  // namespace lfi
