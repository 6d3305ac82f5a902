#include "lfi/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace lfi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sanitize(double v) { return std::isnan(v) ? kInf : v; }

struct Simplex {
  std::vector<Vector> x;
  std::vector<double> f;

  void order() {
    // Insertion sort keeps ties stable, which keeps runs deterministic.
    for (std::size_t i = 1; i < x.size(); ++i) {
      Vector xv = x[i];
      double fv = f[i];
      std::size_t j = i;
      while (j > 0 && f[j - 1] > fv) {
        x[j] = x[j - 1];
        f[j] = f[j - 1];
        --j;
      }
      x[j] = xv;
      f[j] = fv;
    }
  }

  double diameter() const {
    double d = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) d = std::max(d, (x[i] - x[0]).norm());
    return d;
  }
};

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& f, const Vector& x0,
                             const NelderMeadOptions& opt) {
  const int p = static_cast<int>(x0.size());
  if (p < 1) throw ConfigError("nelder_mead: empty start point");
  const int max_evals = opt.max_evals > 0 ? opt.max_evals : 2000 * p;
  const int restart_evals = opt.per_restart_evals > 0 ? opt.per_restart_evals : 250 * p;

  NelderMeadResult res;
  res.x = x0;
  res.fx = sanitize(f(x0));
  res.evals = 1;
  if (!std::isfinite(res.fx)) throw NumericError("objective non-finite at start point");

  Vector step(p);
  for (int i = 0; i < p; ++i) {
    double s = opt.init_step_rel * std::abs(x0[i]);
    step[i] = s > 0.0 ? s : opt.init_step_abs;
  }

  auto eval = [&](const Vector& v) {
    ++res.evals;
    return sanitize(f(v));
  };

  while (res.evals < max_evals) {
    Simplex s;
    s.x.assign(static_cast<std::size_t>(p + 1), res.x);
    s.f.assign(static_cast<std::size_t>(p + 1), 0.0);
    s.f[0] = res.fx;
    for (int i = 0; i < p; ++i) {
      s.x[static_cast<std::size_t>(i + 1)][i] += step[i];
      s.f[static_cast<std::size_t>(i + 1)] = eval(s.x[static_cast<std::size_t>(i + 1)]);
    }
    s.order();

    int inner_start = res.evals;
    bool contracted = false;
    while (res.evals < max_evals && res.evals - inner_start < restart_evals) {
      if (s.diameter() < opt.diameter_tol) {
        contracted = true;
        break;
      }
      const std::size_t worst = static_cast<std::size_t>(p);
      Vector centroid = Vector::Zero(p);
      for (std::size_t i = 0; i < worst; ++i) centroid += s.x[i];
      centroid /= static_cast<double>(p);

      Vector xr = centroid + (centroid - s.x[worst]);
      double fr = eval(xr);
      if (fr < s.f[0]) {
        Vector xe = centroid + 2.0 * (centroid - s.x[worst]);
        double fe = eval(xe);
        if (fe < fr) {
          s.x[worst] = xe;
          s.f[worst] = fe;
        } else {
          s.x[worst] = xr;
          s.f[worst] = fr;
        }
      } else if (fr < s.f[worst - 1]) {
        s.x[worst] = xr;
        s.f[worst] = fr;
      } else {
        // Contract toward the better of the worst vertex and its reflection.
        bool outside = fr < s.f[worst];
        Vector xc = outside ? centroid + 0.5 * (xr - centroid)
                            : centroid + 0.5 * (s.x[worst] - centroid);
        double fc = eval(xc);
        if (fc < std::min(fr, s.f[worst])) {
          s.x[worst] = xc;
          s.f[worst] = fc;
        } else {
          // Shrink toward the best vertex.
          for (std::size_t i = 1; i <= worst; ++i) {
            s.x[i] = s.x[0] + 0.5 * (s.x[i] - s.x[0]);
            s.f[i] = eval(s.x[i]);
            if (res.evals >= max_evals) break;
          }
        }
      }
      s.order();
    }

    if (s.f[0] <= res.fx) {
      res.x = s.x[0];
      res.fx = s.f[0];
    }
    if (contracted && s.diameter() < opt.diameter_tol) {
      res.converged = true;
      break;
    }
    // Restart at the best point with a simplex sized to the stalled one.
    double diam = std::max(s.diameter(), 10.0 * opt.diameter_tol);
    for (int i = 0; i < p; ++i) step[i] = 0.5 * diam;
    ++res.restarts;
  }
  return res;
}

}  // namespace lfi
