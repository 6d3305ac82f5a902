#include "lfi/auxiliary.hpp"

#include <cmath>

namespace lfi {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// State of the Gaussian approximation: mean (mS, mI) and covariance packed as
// (vSS, vSI, vII).
struct LnaState {
  double mS, mI;
  double vSS, vSI, vII;
};

struct LnaDeriv {
  double mS, mI, vSS, vSI, vII;
};

// Mean ODE is the deterministic SI system; the covariance ODE is
// dV/dt = F V + V F' + D with F the drift Jacobian and D the diffusion
// matrix [[r1, -r1], [-r1, r1 + r2]], r1 = beta*mS*mI, r2 = gamma*mI.
LnaDeriv deriv(const LnaState& s, double beta, double gamma) {
  double r1 = beta * s.mS * s.mI;
  double r2 = gamma * s.mI;
  double f11 = -beta * s.mI, f12 = -beta * s.mS;
  double f21 = beta * s.mI, f22 = beta * s.mS - gamma;
  LnaDeriv d;
  d.mS = -r1;
  d.mI = r1 - r2;
  d.vSS = 2.0 * (f11 * s.vSS + f12 * s.vSI) + r1;
  d.vSI = f21 * s.vSS + f22 * s.vSI + f11 * s.vSI + f12 * s.vII - r1;
  d.vII = 2.0 * (f21 * s.vSI + f22 * s.vII) + r1 + r2;
  return d;
}

LnaState rk4_step(const LnaState& s, double beta, double gamma, double h) {
  auto advance = [](const LnaState& base, const LnaDeriv& d, double dt) {
    return LnaState{base.mS + dt * d.mS, base.mI + dt * d.mI, base.vSS + dt * d.vSS,
                    base.vSI + dt * d.vSI, base.vII + dt * d.vII};
  };
  LnaDeriv k1 = deriv(s, beta, gamma);
  LnaDeriv k2 = deriv(advance(s, k1, 0.5 * h), beta, gamma);
  LnaDeriv k3 = deriv(advance(s, k2, 0.5 * h), beta, gamma);
  LnaDeriv k4 = deriv(advance(s, k3, h), beta, gamma);
  LnaState out;
  out.mS = s.mS + h / 6.0 * (k1.mS + 2.0 * k2.mS + 2.0 * k3.mS + k4.mS);
  out.mI = s.mI + h / 6.0 * (k1.mI + 2.0 * k2.mI + 2.0 * k3.mI + k4.mI);
  out.vSS = s.vSS + h / 6.0 * (k1.vSS + 2.0 * k2.vSS + 2.0 * k3.vSS + k4.vSS);
  out.vSI = s.vSI + h / 6.0 * (k1.vSI + 2.0 * k2.vSI + 2.0 * k3.vSI + k4.vSI);
  out.vII = s.vII + h / 6.0 * (k1.vII + 2.0 * k2.vII + 2.0 * k3.vII + k4.vII);
  return out;
}

}  // namespace

double lna_loglik(const LNAAuxSpec& spec, const Dataset& daily_obs) {
  if (spec.beta_A < 0.0 || spec.gamma_A < 0.0 || spec.nugget <= 0.0 || spec.ode_step <= 0.0 ||
      spec.ode_step > 0.1)
    throw ConfigError("invalid LNA auxiliary configuration");
  if (daily_obs.size() < 2) throw ConfigError("LNA likelihood needs at least two observations");

  const double o0 = daily_obs[0];
  const double env_hi = o0 + 5.0;
  const double i0 = spec.assumed_initial_infected;
  if (o0 - i0 < 0.0) throw ConfigError("assumed initial infected exceeds first observation");

  LnaState s{o0 - i0, i0, 0.0, 0.0, 0.0};
  double loglik = 0.0;
  for (std::size_t t = 1; t < daily_obs.size(); ++t) {
    // Integrate over one day; the final step absorbs the grid remainder.
    double remaining = 1.0;
    while (remaining > 1e-12) {
      double h = std::min(spec.ode_step, remaining);
      s = rk4_step(s, spec.beta_A, spec.gamma_A, h);
      remaining -= h;
      if (!(s.mS >= 0.0 && s.mS <= env_hi && s.mI >= 0.0 && s.mI <= env_hi) ||
          !std::isfinite(s.vSS) || !std::isfinite(s.vSI) || !std::isfinite(s.vII))
        return kNegInf;
    }
    // Predictive density of o_t = S + I with observation variance `nugget`.
    double pred_mean = s.mS + s.mI;
    double pred_var = s.vSS + 2.0 * s.vSI + s.vII + spec.nugget;
    if (!(pred_var > 0.0) || !std::isfinite(pred_var)) return kNegInf;
    double resid = daily_obs[t] - pred_mean;
    loglik += -0.5 * std::log(2.0 * 3.14159265358979323846 * pred_var) -
              0.5 * resid * resid / pred_var;
    // Filtering update conditions the covariance only; the mean keeps
    // following its ODE.
    double hS = s.vSS + s.vSI;  // V H' with H = [1, 1]
    double hI = s.vSI + s.vII;
    s.vSS -= hS * hS / pred_var;
    s.vSI -= hS * hI / pred_var;
    s.vII -= hI * hI / pred_var;
  }
  return loglik;
}

double lna_loglik(const LNAAuxSpec& spec, const EpidemicPath& path) {
  return lna_loglik(spec, epidemic_dataset(path));
}

AuxModelSpec lna_aux(double nugget, double ode_step, double assumed_initial_infected) {
  AuxModelSpec spec;
  spec.p_phi = 2;
  spec.box_lo = Vector(2);
  spec.box_hi = Vector(2);
  spec.box_lo << 1e-6, 1e-4;
  spec.box_hi << 1.0, 10.0;
  spec.fit_on_log_scale = true;
  spec.loglik = [nugget, ode_step, assumed_initial_infected](const Dataset& y, const Vector& phi) {
    LNAAuxSpec s;
    s.beta_A = phi[0];
    s.gamma_A = phi[1];
    s.nugget = nugget;
    s.ode_step = ode_step;
    s.assumed_initial_infected = assumed_initial_infected;
    return lna_loglik(s, y);
  };
  return spec;
}

}  // namespace lfi
