#pragma once

#include "lfi/types.hpp"

#include <functional>

namespace lfi {

struct NelderMeadOptions {
  double diameter_tol = 1e-8;
  int max_evals = 0;         // 0 selects 2000 * dim
  int per_restart_evals = 0; // 0 selects 250 * dim
  double init_step_rel = 0.05;
  double init_step_abs = 0.00025;
};

struct NelderMeadResult {
  Vector x;
  double fx = 0.0;
  bool converged = false;
  int evals = 0;
  int restarts = 0;
};

// Minimizes f by the Nelder-Mead simplex method.  Non-finite objective values
// are ordered worst, so callers implement box constraints by returning +inf
// outside the box.  When an inner run exhausts its budget before the simplex
// diameter (max distance from the best vertex) drops below diameter_tol, a
// fresh simplex is rebuilt at the best point and the search continues, until
// the diameter condition is met or max_evals is spent.
NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& f, const Vector& x0,
                             const NelderMeadOptions& opt = {});

}  // namespace lfi
