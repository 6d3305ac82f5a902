#include "lfi/reverse_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lfi {

namespace {

Vector summary_at(const RsProblem& prob, const Vector& theta, NoiseSeed xi) {
  return prob.summary(prob.model(theta, xi));
}

// Central-difference Jacobian of the fixed-noise summary map, q x p.
Matrix summary_jacobian(const RsProblem& prob, const Vector& theta, NoiseSeed xi) {
  const int p = static_cast<int>(theta.size());
  const int q = static_cast<int>(prob.s_obs.size());
  Matrix J(q, p);
  for (int j = 0; j < p; ++j) {
    double h = std::max(1e-5, 1e-5 * std::abs(theta[j]));
    Vector tp = theta, tm = theta;
    tp[j] += h;
    tm[j] -= h;
    J.col(j) = (summary_at(prob, tp, xi) - summary_at(prob, tm, xi)) / (2.0 * h);
  }
  return J;
}

}  // namespace

RsDraw rs_solve_one(const RsProblem& prob, NoiseSeed xi, std::int64_t id) {
  if (!prob.model || !prob.summary) throw ConfigError("reverse sampler needs model and summary");
  if (prob.theta_init.size() != prob.prior.dim())
    throw ConfigError("optimizer start dimension mismatch");

  auto objective = [&](const Vector& theta) {
    Vector s = summary_at(prob, theta, xi);
    if (!s.allFinite()) return std::numeric_limits<double>::infinity();
    return (s - prob.s_obs).squaredNorm();
  };
  NelderMeadResult opt = nelder_mead(objective, prob.theta_init, prob.search);

  RsDraw draw;
  draw.theta = ParameterVector(opt.x);
  draw.s = summary_at(prob, opt.x, xi);
  draw.rho = (draw.s - prob.s_obs).norm();
  draw.seed_id = id;
  draw.converged = opt.converged;

  Matrix J = summary_jacobian(prob, opt.x, xi);
  double det = (J.transpose() * J).determinant();
  draw.volume = det > 0.0 ? std::sqrt(det) : 0.0;
  if (std::isfinite(draw.volume) && draw.volume > 0.0) {
    draw.weight = std::exp(prob.prior.log_density(opt.x)) / draw.volume;
  } else {
    draw.volume = 0.0;
    draw.weight = 0.0;
    draw.converged = false;
  }
  return draw;
}

std::vector<RsDraw> rs_sample(const RsProblem& prob, int M, NoiseSeed root) {
  if (M < 1) throw ConfigError("draw count must be positive");
  std::vector<RsDraw> draws;
  draws.reserve(M);
  for (int i = 0; i < M; ++i)
    draws.push_back(rs_solve_one(prob, child_seed(root, static_cast<std::uint64_t>(i)), i));
  return draws;
}

RsKept rs_threshold(const std::vector<RsDraw>& draws, double keep_fraction) {
  if (draws.empty()) throw ConfigError("no draws to threshold");
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0))
    throw ConfigError("keep fraction must lie in (0, 1]");

  std::vector<int> order(draws.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return draws[a].rho < draws[b].rho; });

  int keep = std::max<int>(1, static_cast<int>(keep_fraction * draws.size()));
  RsKept out;
  out.samples.reserve(keep);
  out.summaries.reserve(keep);
  for (int k = 0; k < keep; ++k) {
    const RsDraw& d = draws[order[k]];
    out.samples.push_back(WeightedSample{d.theta, d.weight, d.rho, d.seed_id});
    out.summaries.push_back(d.s);
    out.h = d.rho;
  }
  out.samples = normalize_weights(std::move(out.samples));
  return out;
}

std::vector<WeightedSample> regression_adjust(const RsKept& kept, const Vector& s_obs) {
  const int M = static_cast<int>(kept.samples.size());
  if (M < 2) throw ConfigError("regression adjustment needs two or more draws");
  const int q = static_cast<int>(s_obs.size());
  const int p = kept.samples[0].theta.dim();

  // Rows scaled by sqrt(w): weighted least squares with intercept.
  Matrix X(M, q + 1);
  Matrix Y(M, p);
  for (int i = 0; i < M; ++i) {
    double sw = std::sqrt(kept.samples[i].weight);
    X(i, 0) = sw;
    X.row(i).tail(q) = sw * (kept.summaries[i] - s_obs).transpose();
    Y.row(i) = sw * kept.samples[i].theta.values.transpose();
  }

  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(X);
  Matrix coef = cod.solve(Y);  // (q+1) x p, minimum-norm when X is rank deficient
  Matrix B = coef.bottomRows(q);

  std::vector<WeightedSample> adjusted = kept.samples;
  for (int i = 0; i < M; ++i) {
    adjusted[i].theta.values -= B.transpose() * (kept.summaries[i] - s_obs);
  }
  return adjusted;
}

}  // namespace lfi
