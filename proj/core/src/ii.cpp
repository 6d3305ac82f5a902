#include "lfi/ii.hpp"

#include "lfi/nelder_mead.hpp"

#include <cmath>

namespace lfi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool in_box(const Vector& lo, const Vector& hi, const Vector& v) {
  for (int j = 0; j < v.size(); ++j)
    if (v[j] < lo[j] || v[j] > hi[j]) return false;
  return true;
}

// Kronecker additive-recurrence sequence: deterministic, roughly equidistributed.
Vector kronecker_point(const Vector& lo, const Vector& hi, int k) {
  static const double alphas[] = {0.6180339887498949, 0.7548776662466927, 0.8191725133961645,
                                  0.8566748838545029, 0.8812714616335695, 0.8986537126286993};
  Vector x(lo.size());
  for (int j = 0; j < lo.size(); ++j) {
    double a = alphas[j % 6];
    double frac = std::fmod(0.5 + a * static_cast<double>(k), 1.0);
    x[j] = lo[j] + (hi[j] - lo[j]) * frac;
  }
  return x;
}

IIResult minimize_multistart(const IIProblem& prob, const std::function<double(const Vector&)>& obj,
                             const Vector& theta_init) {
  std::vector<Vector> starts = ii_start_points(prob.theta_lo, prob.theta_hi, 5, theta_init);
  IIResult best;
  best.objective = kInf;
  for (const auto& s0 : starts) {
    std::vector<std::pair<Vector, double>> trace;
    auto traced = [&](const Vector& t) {
      double v = obj(t);
      trace.emplace_back(t, v);
      return v;
    };
    NelderMeadResult r = nelder_mead(traced, s0, prob.search);
    if (r.fx < best.objective) {
      best.theta = r.x;
      best.objective = r.fx;
      best.converged = r.converged;
      best.trace = std::move(trace);
    }
  }
  return best;
}

}  // namespace

std::vector<Vector> ii_start_points(const Vector& lo, const Vector& hi, int count,
                                    const Vector& theta_init) {
  std::vector<Vector> starts;
  starts.push_back(theta_init);
  for (int k = 1; k < count; ++k) starts.push_back(kronecker_point(lo, hi, k));
  return starts;
}

IIResult ii_wald(const IIProblem& prob, const Vector& theta_init, NoiseSeed xi) {
  auto obj = [&](const Vector& theta) {
    if (!in_box(prob.theta_lo, prob.theta_hi, theta)) return kInf;
    BindingEstimate b =
        binding_pooled(theta, prob.n, prob.model, prob.spec, xi, prob.phi_obs.values, prob.fit);
    Vector d = b.phi_n.values - prob.phi_obs.values;
    double w = weighted_norm(d, prob.W);
    return w * w;
  };
  return minimize_multistart(prob, obj, theta_init);
}

IIResult ii_sqml(const IIProblem& prob, const Dataset& y_obs, const Vector& theta_init,
                 NoiseSeed xi) {
  auto obj = [&](const Vector& theta) {
    if (!in_box(prob.theta_lo, prob.theta_hi, theta)) return kInf;
    BindingEstimate b =
        binding_pooled(theta, prob.n, prob.model, prob.spec, xi, prob.phi_obs.values, prob.fit);
    double q = prob.spec.loglik(y_obs, b.phi_n.values);
    return std::isfinite(q) ? -q : kInf;
  };
  IIResult r = minimize_multistart(prob, obj, theta_init);
  r.objective = -r.objective;  // report the maximized Q
  return r;
}

IIResult ii_emm(const IIProblem& prob, const WeightMatrix& Sigma, const Vector& theta_init,
                NoiseSeed xi) {
  auto obj = [&](const Vector& theta) {
    if (!in_box(prob.theta_lo, prob.theta_hi, theta)) return kInf;
    Vector mean_score = Vector::Zero(prob.spec.p_phi);
    for (int i = 0; i < prob.n; ++i) {
      Dataset y = prob.model(theta, child_seed(xi, static_cast<std::uint64_t>(i)));
      mean_score += aux_score(prob.spec, y, prob.phi_obs.values);
    }
    mean_score /= static_cast<double>(prob.n);
    double w = weighted_norm(mean_score, Sigma);
    return w * w;
  };
  return minimize_multistart(prob, obj, theta_init);
}

}  // namespace lfi
