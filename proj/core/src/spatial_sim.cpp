#include "lfi/rng.hpp"
#include "lfi/spatial.hpp"

#include <cmath>
#include <numbers>

namespace lfi {

namespace {

// Lower Cholesky factor of the inter-site correlation matrix, with an
// escalating diagonal jitter for numerically semidefinite cases.
Matrix correlation_chol(const SpatialLayout& layout, double c1, double c2, double nu) {
  const int M = layout.size();
  Matrix D = layout.distances();
  Matrix C(M, M);
  for (int i = 0; i < M; ++i) {
    C(i, i) = 1.0;
    for (int j = i + 1; j < M; ++j) C(i, j) = C(j, i) = whittle_matern(D(i, j), c1, c2, nu);
  }

  for (double jitter = 0.0; jitter <= 1e-4; jitter = jitter == 0.0 ? 1e-10 : jitter * 10.0) {
    Eigen::LLT<Matrix> llt(C + jitter * Matrix::Identity(M, M));
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  throw NumericError("correlation matrix not positive definite");
}

}  // namespace

FrechetPanel simulate_schlather(const SpatialLayout& layout, double c2, double nu, int T,
                                NoiseSeed seed, double c1, double eps_bound) {
  if (T < 1) throw ConfigError("replicate count must be positive");
  if (!(eps_bound > 0.0)) throw ConfigError("profile bound must be positive");
  const int M = layout.size();
  Matrix L = correlation_chol(layout, c1, c2, nu);

  const double root2pi = std::sqrt(2.0 * std::numbers::pi);
  FrechetPanel panel;
  panel.T = T;
  panel.M = M;
  panel.values.assign(static_cast<std::size_t>(T) * M, 0.0);

  for (int t = 0; t < T; ++t) {
    RngStream rng(child_seed(seed, static_cast<std::uint64_t>(t)));
    Vector g(M);
    double arrival = 0.0;
    // Atoms arrive with decreasing weight 1/arrival; once even a profile
    // pinned at the clip bound cannot raise the pointwise minimum, later atoms
    // cannot change the maximum anywhere.
    for (int atom = 0; atom < 1000000; ++atom) {
      arrival += rng.exponential();
      double zeta = 1.0 / arrival;
      double floor_now = panel.at(t, 0);
      for (int i = 1; i < M; ++i) floor_now = std::min(floor_now, panel.at(t, i));
      if (zeta * root2pi * eps_bound <= floor_now) break;

      for (int i = 0; i < M; ++i) g[i] = rng.normal();
      Vector eps = L * g;
      for (int i = 0; i < M; ++i) {
        double profile = std::max(0.0, std::min(eps[i], eps_bound));
        panel.at(t, i) = std::max(panel.at(t, i), zeta * root2pi * profile);
      }
    }
  }
  return panel;
}

Simulator schlather_simulator(const SpatialLayout& layout, int T, double c1) {
  return [layout, T, c1](const Vector& theta, NoiseSeed seed) {
    if (theta.size() != 2) throw ConfigError("spatial model takes theta = (range, smoothness)");
    return simulate_schlather(layout, theta[0], theta[1], T, seed, c1).values;
  };
}

}  // namespace lfi
