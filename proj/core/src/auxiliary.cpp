#include "lfi/auxiliary.hpp"

#include <cmath>

namespace lfi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double fd_step(double v) { return std::max(1e-5, 1e-5 * std::abs(v)); }

bool in_box(const AuxModelSpec& spec, const Vector& phi) {
  if (spec.box_lo.size() == 0) return true;
  for (int j = 0; j < phi.size(); ++j)
    if (phi[j] < spec.box_lo[j] || phi[j] > spec.box_hi[j]) return false;
  return true;
}

// Shared fitting core over an arbitrary pooled objective.
AuxParameter fit_impl(const AuxModelSpec& spec,
                      const std::function<double(const Vector&)>& loglik_phi,
                      const Vector& phi_init, const FitOptions& opt) {
  if (phi_init.size() != spec.p_phi) throw ConfigError("aux_fit: init dimension mismatch");
  if (!in_box(spec, phi_init)) throw ConfigError("aux_fit: init outside fitting box");
  double f0 = loglik_phi(phi_init);
  if (!std::isfinite(f0)) throw NumericError("aux_fit: non-finite estimating function at init");

  auto to_fit_scale = [&](const Vector& phi) {
    return spec.fit_on_log_scale ? Vector(phi.array().log()) : phi;
  };
  auto from_fit_scale = [&](const Vector& x) {
    return spec.fit_on_log_scale ? Vector(x.array().exp()) : x;
  };

  auto objective = [&](const Vector& x) {
    Vector phi = from_fit_scale(x);
    if (!in_box(spec, phi)) return kInf;
    double q = loglik_phi(phi);
    return std::isfinite(q) ? -q : kInf;
  };

  NelderMeadOptions nm;
  nm.diameter_tol = opt.diameter_tol;
  nm.max_evals = opt.max_evals > 0 ? opt.max_evals : 2000 * spec.p_phi;
  NelderMeadResult r = nelder_mead(objective, to_fit_scale(phi_init), nm);

  AuxParameter out(from_fit_scale(r.x));
  out.loglik_at_fit = -r.fx;
  out.converged = r.converged;
  return out;
}

}  // namespace

AuxParameter aux_fit(const AuxModelSpec& spec, const Dataset& y, const Vector& phi_init,
                     const FitOptions& opt) {
  return fit_impl(spec, [&](const Vector& phi) { return spec.loglik(y, phi); }, phi_init, opt);
}

AuxParameter aux_fit_pooled(const AuxModelSpec& spec, const std::vector<Dataset>& ys,
                            const Vector& phi_init, const FitOptions& opt) {
  if (ys.empty()) throw ConfigError("aux_fit_pooled: no datasets");
  return fit_impl(
      spec,
      [&](const Vector& phi) {
        double acc = 0.0;
        for (const auto& y : ys) acc += spec.loglik(y, phi);
        return acc;
      },
      phi_init, opt);
}

Vector aux_score(const AuxModelSpec& spec, const Dataset& y, const Vector& phi) {
  if (phi.size() != spec.p_phi) throw ConfigError("aux_score: dimension mismatch");
  if (spec.analytic_score) return spec.analytic_score(y, phi);
  Vector s(spec.p_phi);
  for (int j = 0; j < spec.p_phi; ++j) {
    double h = fd_step(phi[j]);
    Vector hi = phi, lo = phi;
    hi[j] += h;
    lo[j] -= h;
    double fh = spec.loglik(y, hi);
    double fl = spec.loglik(y, lo);
    if (!std::isfinite(fh) || !std::isfinite(fl))
      throw NumericError("aux_score: non-finite estimating function at stencil point");
    s[j] = (fh - fl) / (2.0 * h);
  }
  return s;
}

WeightMatrix aux_obs_info(const AuxModelSpec& spec, const Dataset& y, const Vector& phi) {
  const int p = spec.p_phi;
  if (phi.size() != p) throw ConfigError("aux_obs_info: dimension mismatch");
  auto f = [&](const Vector& v) {
    double q = spec.loglik(y, v);
    if (!std::isfinite(q))
      throw NumericError("aux_obs_info: non-finite estimating function at stencil point");
    return q;
  };
  double f0 = f(phi);
  Matrix H(p, p);
  for (int j = 0; j < p; ++j) {
    double hj = fd_step(phi[j]);
    Vector pj = phi, mj = phi;
    pj[j] += hj;
    mj[j] -= hj;
    H(j, j) = (f(pj) - 2.0 * f0 + f(mj)) / (hj * hj);
    for (int k = j + 1; k < p; ++k) {
      double hk = fd_step(phi[k]);
      Vector pp = phi, pm = phi, mp = phi, mm = phi;
      pp[j] += hj; pp[k] += hk;
      pm[j] += hj; pm[k] -= hk;
      mp[j] -= hj; mp[k] += hk;
      mm[j] -= hj; mm[k] -= hk;
      double v = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * hj * hk);
      H(j, k) = v;
      H(k, j) = v;
    }
  }
  Matrix J = -0.5 * (H + H.transpose());
  double maxdiag = J.diagonal().maxCoeff();
  if (!(maxdiag > 0.0)) throw NumericError("information matrix indefinite");
  double eps = 1e-8 * maxdiag;
  const double eps_cap = 1e-2 * maxdiag;
  Matrix repaired = J;
  while (true) {
    Eigen::LLT<Matrix> llt(repaired);
    if (llt.info() == Eigen::Success) break;
    if (eps > eps_cap) throw NumericError("information matrix indefinite");
    repaired = J + eps * Matrix::Identity(p, p);
    eps *= 10.0;
  }
  return WeightMatrix(repaired);
}

AuxModelSpec gaussian_mean_aux(double lo, double hi) {
  AuxModelSpec spec;
  spec.p_phi = 1;
  spec.box_lo = Vector::Constant(1, lo);
  spec.box_hi = Vector::Constant(1, hi);
  spec.loglik = [](const Dataset& y, const Vector& phi) {
    double acc = 0.0;
    for (double v : y) acc += (v - phi[0]) * (v - phi[0]);
    double n = static_cast<double>(y.size());
    return -0.5 * acc - 0.5 * n * std::log(2.0 * 3.14159265358979323846);
  };
  spec.analytic_score = [](const Dataset& y, const Vector& phi) {
    double acc = 0.0;
    for (double v : y) acc += v - phi[0];
    Vector s(1);
    s[0] = acc;
    return s;
  };
  return spec;
}

AuxModelSpec gaussian_mean_logsd_aux() {
  AuxModelSpec spec;
  spec.p_phi = 2;
  spec.box_lo = Vector(2);
  spec.box_hi = Vector(2);
  spec.box_lo << -1e6, -20.0;
  spec.box_hi << 1e6, 20.0;
  spec.loglik = [](const Dataset& y, const Vector& phi) {
    double mu = phi[0];
    double sigma = std::exp(phi[1]);
    double acc = 0.0;
    for (double v : y) acc += (v - mu) * (v - mu);
    double n = static_cast<double>(y.size());
    return -0.5 * acc / (sigma * sigma) - n * phi[1] -
           0.5 * n * std::log(2.0 * 3.14159265358979323846);
  };
  spec.analytic_score = [](const Dataset& y, const Vector& phi) {
    double mu = phi[0];
    double sigma = std::exp(phi[1]);
    double d1 = 0.0, d2 = 0.0;
    for (double v : y) {
      d1 += (v - mu);
      d2 += (v - mu) * (v - mu);
    }
    double n = static_cast<double>(y.size());
    Vector s(2);
    s[0] = d1 / (sigma * sigma);
    s[1] = d2 / (sigma * sigma) - n;
    return s;
  };
  return spec;
}

namespace {

BindingEstimate binding_impl(const Vector& theta, int n, const Simulator& model,
                             const AuxModelSpec& spec, NoiseSeed xi, const Vector& phi_init,
                             const FitOptions& opt, BindingForm form) {
  if (n < 1) throw ConfigError("binding estimate requires n >= 1");
  std::vector<Dataset> ys;
  ys.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ys.push_back(model(theta, child_seed(xi, static_cast<std::uint64_t>(i))));

  BindingEstimate est;
  est.n = n;
  est.form = form;
  if (form == BindingForm::pooled) {
    est.phi_n = aux_fit_pooled(spec, ys, phi_init, opt);
  } else {
    Vector acc = Vector::Zero(spec.p_phi);
    double ll = 0.0;
    bool conv = true;
    for (const auto& y : ys) {
      AuxParameter fit = aux_fit(spec, y, phi_init, opt);
      acc += fit.values;
      ll += fit.loglik_at_fit;
      conv = conv && fit.converged;
    }
    est.phi_n = AuxParameter(acc / static_cast<double>(n));
    est.phi_n.loglik_at_fit = ll;
    est.phi_n.converged = conv;
  }
  return est;
}

}  // namespace

BindingEstimate binding_pooled(const Vector& theta, int n, const Simulator& model,
                               const AuxModelSpec& spec, NoiseSeed xi, const Vector& phi_init,
                               const FitOptions& opt) {
  return binding_impl(theta, n, model, spec, xi, phi_init, opt, BindingForm::pooled);
}

BindingEstimate binding_mean(const Vector& theta, int n, const Simulator& model,
                             const AuxModelSpec& spec, NoiseSeed xi, const Vector& phi_init,
                             const FitOptions& opt) {
  return binding_impl(theta, n, model, spec, xi, phi_init, opt, BindingForm::mean_of_fits);
}

}  // namespace lfi
