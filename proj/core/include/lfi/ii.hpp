#pragma once

#include "lfi/auxiliary.hpp"
#include "lfi/types.hpp"

#include <vector>

namespace lfi {

struct IIProblem {
  Simulator model;
  AuxModelSpec spec;
  AuxParameter phi_obs;
  int n = 1;
  WeightMatrix W = WeightMatrix::identity(1);
  Vector theta_lo, theta_hi;  // search box
  FitOptions fit;
  NelderMeadOptions search;
};

struct IIResult {
  Vector theta;
  double objective = 0.0;
  bool converged = false;
  // one row per objective evaluation of the winning start: (theta..., value)
  std::vector<std::pair<Vector, double>> trace;
};

// All three estimators hold the simulation noise fixed across theta
// evaluations (common random numbers), so each objective is deterministic.
// theta_init seeds the first Nelder-Mead start; four further starts come from
// a low-discrepancy grid over the box, and the best result is returned.

// Minimizes (phi_n(theta) - phi_obs)' W (phi_n(theta) - phi_obs).
IIResult ii_wald(const IIProblem& prob, const Vector& theta_init, NoiseSeed xi);

// Maximizes Q(y_obs; phi_n(theta)).
IIResult ii_sqml(const IIProblem& prob, const Dataset& y_obs, const Vector& theta_init,
                 NoiseSeed xi);

// Minimizes the quadratic form of the mean simulated score at phi_obs,
// weighted by Sigma.  S_A(y_obs, phi_obs) is zero by convention.
IIResult ii_emm(const IIProblem& prob, const WeightMatrix& Sigma, const Vector& theta_init,
                NoiseSeed xi);

// The low-discrepancy start points used by the estimators, exposed for tests.
std::vector<Vector> ii_start_points(const Vector& lo, const Vector& hi, int count,
                                    const Vector& theta_init);

}  // namespace lfi
