#pragma once

#include "lfi/auxiliary.hpp"
#include "lfi/types.hpp"

#include <array>
#include <vector>

namespace lfi {

// Monitoring sites in the plane.
struct SpatialLayout {
  Matrix coords;  // M x 2

  int size() const { return static_cast<int>(coords.rows()); }
  Matrix distances() const;
};

SpatialLayout make_grid_layout(int nx, int ny, double spacing = 1.0);

// Componentwise annual-maxima panel on the unit Frechet scale: T replicates
// over M sites, stored row-major so it round-trips through Dataset.
struct FrechetPanel {
  int T = 0;
  int M = 0;
  Dataset values;

  double at(int t, int i) const { return values[static_cast<std::size_t>(t) * M + i]; }
  double& at(int t, int i) { return values[static_cast<std::size_t>(t) * M + i]; }
};

FrechetPanel panel_from_dataset(const Dataset& flat, int T, int M);

// Whittle-Matern correlation c1 * 2^(1-nu)/Gamma(nu) * (h/c2)^nu * K_nu(h/c2),
// with rho(0) = c1.  Requires c2 > 0, nu > 0, 0 < c1 <= 1.
double whittle_matern(double h, double c1, double c2, double nu);

// Bivariate distribution of an extremal Gaussian process at two sites with
// correlation rho, unit Frechet margins.  rho must lie in [-1, 1]; the density
// additionally needs z1, z2 > 0.
double schlather_bivariate_cdf(double z1, double z2, double rho);
double schlather_bivariate_logdensity(double z1, double z2, double rho);
double schlather_bivariate_density(double z1, double z2, double rho);

// Sum of pairwise log densities over all site pairs and replicates.
double pairwise_composite_loglik(const FrechetPanel& panel, const SpatialLayout& layout,
                                 double c2, double nu, double c1 = 1.0);

// Auxiliary-model wrapper around the pairwise composite likelihood with
// phi = (c2, nu); datasets are flattened T x M panels.
AuxModelSpec composite_likelihood_aux(const SpatialLayout& layout, int T, double c1 = 1.0,
                                      double box_lo = 1e-3, double box_hi = 20.0);

// Model extremal coefficient of a site pair, theta(h) = 1 + sqrt((1 - rho)/2).
double extremal_coeff_pair_theory(double rho);

// Madogram-free empirical estimator for a site triplet:
// T / sum_t 1/max(z_ti, z_tj, z_tk).  Unbiased scaling by the replicate count.
double ec_triplet_estimate(const FrechetPanel& panel, int i, int j, int k);

// Site triplets bucketed by triangle shape: keys are (perimeter, ascending
// side lengths) rounded to 1e-9, ranked with ties sharing the rank of their
// first occurrence, then cut into at most K rank bins.  Empty bins vanish, so
// the summary dimension is the number of returned groups.
struct TripletGroups {
  std::vector<std::vector<std::array<int, 3>>> members;

  int count() const { return static_cast<int>(members.size()); }
};

TripletGroups ec_groups(const SpatialLayout& layout, int K);

// Group means of the triplet estimates; one entry per group.
Vector ec_group_summary(const FrechetPanel& panel, const TripletGroups& groups);

// Generalized extreme value margins <-> unit Frechet.  xi near zero takes the
// Gumbel limit; arguments outside the support are errors.
struct GevParams {
  double mu = 0.0;
  double sigma = 1.0;
  double xi = 0.0;
};

double gev_to_frechet(double z, const GevParams& g);
double frechet_to_gev(double u, const GevParams& g);

// Truncated extremal Gaussian process simulator: spectral representation with
// Poisson weights and Gaussian profiles clipped at eps_bound standard
// deviations, which bounds the profile sup and gives a finite stopping rule.
FrechetPanel simulate_schlather(const SpatialLayout& layout, double c2, double nu, int T,
                                NoiseSeed seed, double c1 = 1.0, double eps_bound = 5.0);

// Simulator closure over theta = (c2, nu) producing flattened panels.
Simulator schlather_simulator(const SpatialLayout& layout, int T, double c1 = 1.0);

}  // namespace lfi
