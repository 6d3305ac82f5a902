#include "lfi/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lfi {

double mean(const std::vector<double>& x) {
  if (x.empty()) throw NumericError("mean of empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(const std::vector<double>& x) {
  if (x.size() < 2) throw NumericError("variance needs at least two points");
  double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

double sd(const std::vector<double>& x) { return std::sqrt(variance(x)); }

double quantile(std::vector<double> x, double p) {
  if (x.empty()) throw NumericError("quantile of empty sample");
  if (p < 0.0 || p > 1.0) throw ConfigError("quantile level outside [0,1]");
  std::sort(x.begin(), x.end());
  double idx = p * static_cast<double>(x.size() - 1);
  std::size_t lo = static_cast<std::size_t>(idx);
  if (lo + 1 >= x.size()) return x.back();
  double frac = idx - static_cast<double>(lo);
  return x[lo] + frac * (x[lo + 1] - x[lo]);
}

double weighted_quantile(std::vector<double> x, std::vector<double> w, double p) {
  if (x.empty() || x.size() != w.size()) throw NumericError("weighted_quantile: bad input");
  if (p < 0.0 || p > 1.0) throw ConfigError("quantile level outside [0,1]");
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (total <= 0.0) throw NumericError("degenerate weight set");
  double acc = 0.0;
  for (std::size_t k : order) {
    acc += w[k] / total;
    if (acc >= p) return x[k];
  }
  return x[order.back()];
}

double weighted_mean(const std::vector<double>& x, const std::vector<double>& w) {
  if (x.empty() || x.size() != w.size()) throw NumericError("weighted_mean: bad input");
  double total = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    total += w[i];
    acc += w[i] * x[i];
  }
  if (total <= 0.0) throw NumericError("degenerate weight set");
  return acc / total;
}

double weighted_sd(const std::vector<double>& x, const std::vector<double>& w) {
  double m = weighted_mean(x, w);
  double total = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    total += w[i];
    acc += w[i] * (x[i] - m) * (x[i] - m);
  }
  return std::sqrt(acc / total);
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw NumericError("KS statistic of empty sample");
  std::sort(sample.begin(), sample.end());
  double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    double F = cdf(sample[i]);
    d = std::max(d, std::abs(F - static_cast<double>(i + 1) / n));
    d = std::max(d, std::abs(F - static_cast<double>(i) / n));
  }
  return d;
}

double ks_statistic_weighted(std::vector<double> sample, std::vector<double> w,
                             const std::function<double(double)>& cdf) {
  if (sample.empty() || sample.size() != w.size())
    throw NumericError("KS statistic needs matching nonempty sample and weights");
  std::vector<std::size_t> order(sample.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return sample[a] < sample[b]; });

  double total = 0.0;
  for (double wi : w) {
    if (!(wi >= 0.0)) throw NumericError("negative weight in KS statistic");
    total += wi;
  }
  if (!(total > 0.0)) throw NumericError("degenerate weight set");

  double cum = 0.0;
  double d = 0.0;
  for (std::size_t idx : order) {
    double F = cdf(sample[idx]);
    d = std::max(d, std::abs(F - cum / total));
    cum += w[idx];
    d = std::max(d, std::abs(F - cum / total));
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw NumericError("KS statistic of empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double na = static_cast<double>(a.size());
  double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical(double alpha, std::size_t n) {
  if (alpha <= 0.0 || alpha >= 1.0) throw ConfigError("KS level outside (0,1)");
  return std::sqrt(-std::log(alpha / 2.0) / 2.0) / std::sqrt(static_cast<double>(n));
}

double batch_means_mcse(const std::vector<double>& chain, int num_batches) {
  std::size_t n = chain.size();
  if (n < 4) throw NumericError("chain too short for batch means");
  int B = num_batches > 1 ? num_batches
                          : static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
  B = std::max(2, std::min<int>(B, static_cast<int>(n / 2)));
  std::size_t m = n / static_cast<std::size_t>(B);  // truncate the remainder
  std::vector<double> bm(static_cast<std::size_t>(B));
  for (int b = 0; b < B; ++b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < m; ++k) acc += chain[static_cast<std::size_t>(b) * m + k];
    bm[static_cast<std::size_t>(b)] = acc / static_cast<double>(m);
  }
  return sd(bm) / std::sqrt(static_cast<double>(B));
}

DensityGrid kde_grid(const std::vector<double>& sample, const std::vector<double>& weights,
                     double lo, double hi, int points, double bandwidth) {
  if (sample.empty() || points < 2 || hi <= lo) throw ConfigError("kde_grid: bad input");
  std::vector<double> w = weights;
  if (w.empty()) w.assign(sample.size(), 1.0);
  if (w.size() != sample.size()) throw ConfigError("kde_grid: weight length mismatch");
  double h = bandwidth;
  if (h <= 0.0) {
    // Silverman on the weighted sample; effective size by the Kish formula.
    double s = weighted_sd(sample, w);
    double sw = 0.0, sw2 = 0.0;
    for (double wi : w) {
      sw += wi;
      sw2 += wi * wi;
    }
    double neff = sw * sw / sw2;
    h = 1.06 * std::max(s, 1e-12) * std::pow(neff, -0.2);
  }
  DensityGrid g;
  g.x.resize(static_cast<std::size_t>(points));
  g.density.resize(static_cast<std::size_t>(points));
  double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (int j = 0; j < points; ++j) {
    double xj = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(points - 1);
    double acc = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i)
      acc += w[i] * normal_pdf((xj - sample[i]) / h);
    g.x[static_cast<std::size_t>(j)] = xj;
    g.density[static_cast<std::size_t>(j)] = acc / (total * h);
  }
  return g;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846);
}

}  // namespace lfi
