#pragma once

#include "lfi/types.hpp"

#include <functional>
#include <vector>

namespace lfi {

double mean(const std::vector<double>& x);
double variance(const std::vector<double>& x);  // sample variance, n-1 denominator
double sd(const std::vector<double>& x);

// Linear-interpolation quantile (R type 7).  p in [0, 1].
double quantile(std::vector<double> x, double p);

// Weighted quantile: inverse of the weighted empirical CDF with weights
// normalized internally.  Used for credible intervals from weighted samples.
double weighted_quantile(std::vector<double> x, std::vector<double> w, double p);

double weighted_mean(const std::vector<double>& x, const std::vector<double>& w);
double weighted_sd(const std::vector<double>& x, const std::vector<double>& w);

// One-sample Kolmogorov-Smirnov statistic against a CDF.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

// One-sample statistic with a weighted empirical CDF; weights need not be
// normalized.  Equal weights reduce to ks_statistic.
double ks_statistic_weighted(std::vector<double> sample, std::vector<double> w,
                             const std::function<double(double)>& cdf);

// Two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// Critical value of the one-sample KS statistic at level alpha,
// sqrt(-log(alpha/2)/2)/sqrt(n) (asymptotic).
double ks_critical(double alpha, std::size_t n);

// Monte Carlo standard error of the mean of a correlated chain, batch means
// with floor(sqrt(n)) batches by default.
double batch_means_mcse(const std::vector<double>& chain, int num_batches = 0);

// Gaussian kernel density estimate evaluated on an equispaced grid.
// bandwidth <= 0 selects Silverman's rule on the weighted sample.
struct DensityGrid {
  std::vector<double> x;
  std::vector<double> density;
};
DensityGrid kde_grid(const std::vector<double>& sample, const std::vector<double>& weights,
                     double lo, double hi, int points, double bandwidth = 0.0);

double normal_cdf(double z);
double normal_pdf(double z);

}  // namespace lfi
