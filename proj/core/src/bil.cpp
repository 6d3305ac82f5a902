#include "lfi/bil.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace lfi {

namespace {

constexpr std::uint64_t kProposalStream = 0;
constexpr std::uint64_t kInitSimStream = 2;
constexpr std::uint64_t kSimStreamBase = 3;

struct LoglikEstimate {
  double value = -std::numeric_limits<double>::infinity();
  bool fit_converged = true;
};

LoglikEstimate estimate_loglik(const Vector& theta, const Simulator& model,
                               const AuxModelSpec& spec, const Dataset& y_obs,
                               const PdbilOptions& opt, NoiseSeed xi, const Vector& phi_init) {
  LoglikEstimate est;
  AuxParameter phi;
  if (opt.lookup) {
    if (theta.size() != 1) throw ConfigError("binding lookup needs a scalar parameter");
    phi = AuxParameter((*opt.lookup)(theta[0]));
  } else {
    BindingEstimate b = opt.form == BindingForm::pooled
                            ? binding_pooled(theta, opt.n, model, spec, xi, phi_init, opt.fit)
                            : binding_mean(theta, opt.n, model, spec, xi, phi_init, opt.fit);
    phi = b.phi_n;
    est.fit_converged = phi.converged;
  }
  est.value = spec.loglik(y_obs, phi.values);
  if (std::isnan(est.value)) throw NumericError("auxiliary likelihood returned NaN");
  return est;
}

}  // namespace

Vector BindingLookup::operator()(double theta) const {
  const int K = static_cast<int>(knots.size());
  if (K < 2 || phi.rows() != K) throw ConfigError("binding lookup needs two or more knots");
  if (theta <= knots[0]) return phi.row(0);
  if (theta >= knots[K - 1]) return phi.row(K - 1);
  int k = 1;
  while (knots[k] < theta) ++k;
  double w = (theta - knots[k - 1]) / (knots[k] - knots[k - 1]);
  return ((1.0 - w) * phi.row(k - 1) + w * phi.row(k)).transpose();
}

BindingLookup build_binding_lookup(const Simulator& model, const AuxModelSpec& spec, int n,
                                   const Vector& knots, NoiseSeed xi, const Vector& phi_init,
                                   BindingForm form, const FitOptions& fit) {
  const int K = static_cast<int>(knots.size());
  if (K < 2) throw ConfigError("binding lookup needs two or more knots");
  for (int k = 1; k < K; ++k)
    if (!(knots[k] > knots[k - 1])) throw ConfigError("lookup knots must be strictly increasing");

  BindingLookup table;
  table.knots = knots;
  table.phi.resize(K, spec.p_phi);
  for (int k = 0; k < K; ++k) {
    Vector theta(1);
    theta[0] = knots[k];
    NoiseSeed xi_k = child_seed(xi, static_cast<std::uint64_t>(k));
    BindingEstimate b = form == BindingForm::pooled
                            ? binding_pooled(theta, n, model, spec, xi_k, phi_init, fit)
                            : binding_mean(theta, n, model, spec, xi_k, phi_init, fit);
    table.phi.row(k) = b.phi_n.values.transpose();
  }
  return table;
}

PdbilResult pdbil_mcmc(const PriorBox& prior, const Simulator& model, const AuxModelSpec& spec,
                       const Dataset& y_obs, const PdbilOptions& opt, NoiseSeed root) {
  const int p = prior.dim();
  if (opt.T < 1) throw ConfigError("chain length must be positive");
  if (opt.n < 1) throw ConfigError("replicate count must be positive");
  if (opt.theta0.size() != p) throw ConfigError("initial state dimension mismatch");
  if (!prior.inside(opt.theta0)) throw ConfigError("initial state outside the prior support");
  if (opt.proposal_chol.rows() != p || opt.proposal_chol.cols() != p)
    throw ConfigError("proposal factor dimension mismatch");
  if (!(opt.burn_frac >= 0.0 && opt.burn_frac < 1.0))
    throw ConfigError("burn-in fraction must lie in [0, 1)");

  const auto t0 = std::chrono::steady_clock::now();
  RngStream walk(child_seed(root, kProposalStream));

  // The observed fit seeds every refit; its own start point is the box centre
  // on whichever scale the auxiliary optimizes.
  Vector phi_init(spec.p_phi);
  for (int j = 0; j < spec.p_phi; ++j) {
    phi_init[j] = spec.fit_on_log_scale
                      ? std::exp(0.5 * (std::log(spec.box_lo[j]) + std::log(spec.box_hi[j])))
                      : 0.5 * (spec.box_lo[j] + spec.box_hi[j]);
  }
  AuxParameter phi_obs = aux_fit(spec, y_obs, phi_init, opt.fit);

  PdbilResult out;
  out.full_chain.reserve(opt.T);
  out.loglik_trace.reserve(opt.T);

  Vector theta = opt.theta0;
  LoglikEstimate cur =
      estimate_loglik(theta, model, spec, y_obs, opt, child_seed(root, kInitSimStream),
                      phi_obs.values);
  if (!cur.fit_converged) ++out.fit_failures;
  if (!opt.lookup) out.simulations += opt.n;

  int accepted = 0;
  for (int i = 0; i < opt.T; ++i) {
    Vector step(p);
    for (int j = 0; j < p; ++j) step[j] = walk.normal();
    Vector prop = theta + opt.proposal_chol * step;
    double u = walk.uniform01();

    if (prior.inside(prop)) {
      LoglikEstimate cand = estimate_loglik(
          prop, model, spec, y_obs, opt,
          child_seed(root, kSimStreamBase + static_cast<std::uint64_t>(i)), phi_obs.values);
      if (!opt.lookup) out.simulations += opt.n;
      if (!cand.fit_converged) ++out.fit_failures;

      double log_ratio = prior.log_density(prop) + cand.value -
                         (prior.log_density(theta) + cur.value);
      if (std::log(u) < log_ratio) {
        theta = prop;
        cur = cand;
        ++accepted;
      }
    }

    out.full_chain.push_back(theta);
    out.loglik_trace.push_back(cur.value);
  }

  const int burn = static_cast<int>(opt.burn_frac * opt.T);
  out.samples.reserve(opt.T - burn);
  for (int i = burn; i < opt.T; ++i)
    out.samples.push_back(
        WeightedSample{ParameterVector(out.full_chain[i]), 1.0, out.loglik_trace[i], i});

  out.accept_rate = static_cast<double>(accepted) / opt.T;
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace lfi
