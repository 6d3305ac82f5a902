#pragma once

#include "lfi/abc.hpp"
#include "lfi/nelder_mead.hpp"

#include <functional>
#include <vector>

namespace lfi {

// One fixed-noise optimization draw.
struct RsDraw {
  ParameterVector theta;
  Vector s;            // summary achieved at the solution
  double rho = 0.0;    // ||s - s_obs||
  double volume = 0.0; // sqrt(det(J' J)) of the summary map at the solution
  double weight = 0.0; // prior density / volume, unnormalized
  std::int64_t seed_id = 0;
  bool converged = false;
};

struct RsProblem {
  Simulator model;
  std::function<Vector(const Dataset&)> summary;
  Vector s_obs;
  PriorBox prior;     // support and weighting density
  Vector theta_init;  // optimizer start, shared across draws
  NelderMeadOptions search;
};

// Solves min_theta ||s(y(theta, xi)) - s_obs|| for one noise realization and
// attaches the Jacobian-volume weight.  A zero or non-finite volume marks the
// draw unusable (weight 0, converged false) rather than throwing.
RsDraw rs_solve_one(const RsProblem& prob, NoiseSeed xi, std::int64_t id);

// M independent draws on child streams of root.
std::vector<RsDraw> rs_sample(const RsProblem& prob, int M, NoiseSeed root);

struct RsKept {
  std::vector<WeightedSample> samples;  // weights normalized
  std::vector<Vector> summaries;        // aligned with samples
  double h = 0.0;                       // largest rho kept
};

// Keeps the smallest-rho fraction of the draws and normalizes their weights.
RsKept rs_threshold(const std::vector<RsDraw>& draws, double keep_fraction);

// Weighted linear regression of theta on (s - s_obs); each kept draw moves to
// theta - B'(s_i - s_obs).  Exactly collinear summary residuals are expected
// (an overdetermined solve leaves them on a hyperplane), so the fit uses a
// minimum-norm least-squares solution.
std::vector<WeightedSample> regression_adjust(const RsKept& kept, const Vector& s_obs);

}  // namespace lfi
