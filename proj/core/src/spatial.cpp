#include "lfi/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>

namespace lfi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_panel(const FrechetPanel& panel) {
  if (panel.T < 1 || panel.M < 1) throw ConfigError("panel needs positive dimensions");
  if (panel.values.size() != static_cast<std::size_t>(panel.T) * panel.M)
    throw ConfigError("panel storage size mismatch");
}

std::int64_t round9(double x) { return std::llround(x * 1e9); }

// Pairs indexed against the distinct inter-site distances, so each composite
// evaluation pays one correlation evaluation per distance, not per pair.
struct PairTable {
  struct Pair {
    int i, j, dist_index;
  };
  std::vector<Pair> pairs;
  std::vector<double> dists;
};

PairTable build_pair_table(const SpatialLayout& layout) {
  const int M = layout.size();
  if (M < 2) throw ConfigError("need two or more sites");
  Matrix D = layout.distances();

  PairTable table;
  std::vector<std::int64_t> keys;
  for (int i = 0; i < M; ++i) {
    for (int j = i + 1; j < M; ++j) {
      std::int64_t key = std::llround(D(i, j) * 1e12);
      int idx = -1;
      for (int k = 0; k < static_cast<int>(keys.size()); ++k)
        if (keys[k] == key) {
          idx = k;
          break;
        }
      if (idx < 0) {
        idx = static_cast<int>(keys.size());
        keys.push_back(key);
        table.dists.push_back(D(i, j));
      }
      table.pairs.push_back({i, j, idx});
    }
  }
  return table;
}

double composite_from_table(const FrechetPanel& panel, const PairTable& table, double c1,
                            double c2, double nu) {
  if (!(c2 > 0.0) || !(nu > 0.0)) return -kInf;
  std::vector<double> rho(table.dists.size());
  for (std::size_t d = 0; d < table.dists.size(); ++d)
    rho[d] = whittle_matern(table.dists[d], c1, c2, nu);

  double total = 0.0;
  for (int t = 0; t < panel.T; ++t) {
    for (const auto& pr : table.pairs) {
      total += schlather_bivariate_logdensity(panel.at(t, pr.i), panel.at(t, pr.j),
                                              rho[pr.dist_index]);
      if (total == -kInf) return -kInf;
    }
  }
  return total;
}

}  // namespace

Matrix SpatialLayout::distances() const {
  const int M = size();
  if (M < 1 || coords.cols() != 2) throw ConfigError("layout needs M x 2 coordinates");
  Matrix D = Matrix::Zero(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = i + 1; j < M; ++j) {
      double d = (coords.row(i) - coords.row(j)).norm();
      D(i, j) = D(j, i) = d;
    }
  return D;
}

SpatialLayout make_grid_layout(int nx, int ny, double spacing) {
  if (nx < 1 || ny < 1 || !(spacing > 0.0)) throw ConfigError("bad grid layout request");
  SpatialLayout layout;
  layout.coords.resize(nx * ny, 2);
  int r = 0;
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      layout.coords(r, 0) = ix * spacing;
      layout.coords(r, 1) = iy * spacing;
      ++r;
    }
  return layout;
}

FrechetPanel panel_from_dataset(const Dataset& flat, int T, int M) {
  FrechetPanel panel;
  panel.T = T;
  panel.M = M;
  panel.values = flat;
  validate_panel(panel);
  return panel;
}

double whittle_matern(double h, double c1, double c2, double nu) {
  if (!(c1 > 0.0 && c1 <= 1.0)) throw ConfigError("sill must lie in (0, 1]");
  if (!(c2 > 0.0) || !(nu > 0.0)) throw ConfigError("range and smoothness must be positive");
  if (h < 0.0) throw ConfigError("negative distance");
  if (h == 0.0) return c1;

  double x = h / c2;
  double bessel = std::cyl_bessel_k(nu, x);
  if (bessel == 0.0) return 0.0;  // far-field underflow
  double rho = c1 * std::exp((1.0 - nu) * std::numbers::ln2 - std::lgamma(nu)) *
               std::pow(x, nu) * bessel;
  if (!std::isfinite(rho)) throw NumericError("correlation evaluation overflowed");
  return rho;
}

double schlather_bivariate_cdf(double z1, double z2, double rho) {
  if (!(z1 > 0.0 && z2 > 0.0)) return 0.0;
  if (rho < -1.0 || rho > 1.0) throw NumericError("correlation outside [-1, 1]");
  double S = z1 + z2;
  double radicand = 1.0 - 2.0 * (rho + 1.0) * z1 * z2 / (S * S);
  double R = std::sqrt(std::max(0.0, radicand));
  return std::exp(-0.5 * (1.0 / z1 + 1.0 / z2) * (1.0 + R));
}

double schlather_bivariate_logdensity(double z1, double z2, double rho) {
  if (!(z1 > 0.0 && z2 > 0.0)) throw NumericError("density needs positive margins");
  if (rho < -1.0 || rho > 1.0) throw NumericError("correlation outside [-1, 1]");

  double a = rho + 1.0;
  double S = z1 + z2;
  double radicand = 1.0 - 2.0 * a * z1 * z2 / (S * S);
  double R = std::sqrt(std::max(0.0, radicand));

  double W = -0.5 * (1.0 / z1 + 1.0 / z2) * (1.0 + R);
  if (a == 0.0) {
    // Independence: product of Frechet densities.
    return W - 2.0 * (std::log(z1) + std::log(z2));
  }
  if (R < 1e-150) throw NumericError("degenerate pair correlation");

  double S2 = S * S;
  double Wu = (1.0 + R) / (2.0 * z1 * z1) + a * (z2 - z1) / (2.0 * z1 * R * S2);
  double Wv = (1.0 + R) / (2.0 * z2 * z2) + a * (z1 - z2) / (2.0 * z2 * R * S2);
  double Wuv = a / (R * S2 * S) -
               a * a * (z2 - z1) * (z2 - z1) / (2.0 * R * R * R * S2 * S2 * S);

  double inner = Wu * Wv + Wuv;
  if (inner < -1e-10) throw NumericError("negative density from pair expansion");
  if (inner <= 0.0) return -kInf;
  return W + std::log(inner);
}

double schlather_bivariate_density(double z1, double z2, double rho) {
  return std::exp(schlather_bivariate_logdensity(z1, z2, rho));
}

double pairwise_composite_loglik(const FrechetPanel& panel, const SpatialLayout& layout,
                                 double c2, double nu, double c1) {
  validate_panel(panel);
  if (panel.M != layout.size()) throw ConfigError("panel and layout disagree on site count");
  PairTable table = build_pair_table(layout);
  return composite_from_table(panel, table, c1, c2, nu);
}

AuxModelSpec composite_likelihood_aux(const SpatialLayout& layout, int T, double c1,
                                      double box_lo, double box_hi) {
  if (T < 1) throw ConfigError("replicate count must be positive");
  if (!(box_lo > 0.0 && box_lo < box_hi)) throw ConfigError("bad composite fitting box");
  PairTable table = build_pair_table(layout);
  const int M = layout.size();

  AuxModelSpec spec;
  spec.p_phi = 2;
  spec.box_lo = Vector::Constant(2, box_lo);
  spec.box_hi = Vector::Constant(2, box_hi);
  spec.loglik = [table, c1, T, M](const Dataset& y, const Vector& phi) {
    FrechetPanel panel = panel_from_dataset(y, T, M);
    return composite_from_table(panel, table, c1, phi[0], phi[1]);
  };
  return spec;
}

double extremal_coeff_pair_theory(double rho) {
  if (rho < -1.0 || rho > 1.0) throw NumericError("correlation outside [-1, 1]");
  return 1.0 + std::sqrt(0.5 * (1.0 - rho));
}

double ec_triplet_estimate(const FrechetPanel& panel, int i, int j, int k) {
  validate_panel(panel);
  if (i < 0 || j < 0 || k < 0 || i >= panel.M || j >= panel.M || k >= panel.M)
    throw ConfigError("triplet index out of range");
  double denom = 0.0;
  for (int t = 0; t < panel.T; ++t) {
    double top = std::max(panel.at(t, i), std::max(panel.at(t, j), panel.at(t, k)));
    if (!(top > 0.0)) throw NumericError("extremal estimate needs positive margins");
    denom += 1.0 / top;
  }
  return panel.T / denom;
}

TripletGroups ec_groups(const SpatialLayout& layout, int K) {
  const int M = layout.size();
  if (M < 3) throw ConfigError("need three or more sites");
  if (K < 1) throw ConfigError("group count must be positive");
  Matrix D = layout.distances();

  struct Entry {
    std::array<std::int64_t, 4> key;
    std::array<int, 3> sites;
  };
  std::vector<Entry> entries;
  for (int i = 0; i < M; ++i)
    for (int j = i + 1; j < M; ++j)
      for (int k = j + 1; k < M; ++k) {
        std::array<double, 3> sides = {D(i, j), D(i, k), D(j, k)};
        std::sort(sides.begin(), sides.end());
        double per = sides[0] + sides[1] + sides[2];
        entries.push_back(
            {{round9(per), round9(sides[0]), round9(sides[1]), round9(sides[2])}, {i, j, k}});
      }

  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.key < b.key; });

  const int N = static_cast<int>(entries.size());
  TripletGroups groups;
  int last_bin = -1;
  int rank = 0;
  for (int t = 0; t < N; ++t) {
    if (t > 0 && entries[t].key != entries[t - 1].key) rank = t;
    int bin = static_cast<int>(static_cast<std::int64_t>(rank) * K / N);
    if (bin != last_bin) {
      groups.members.emplace_back();
      last_bin = bin;
    }
    groups.members.back().push_back(entries[t].sites);
  }
  return groups;
}

Vector ec_group_summary(const FrechetPanel& panel, const TripletGroups& groups) {
  if (groups.count() < 1) throw ConfigError("no triplet groups");
  Vector out(groups.count());
  for (int g = 0; g < groups.count(); ++g) {
    double acc = 0.0;
    for (const auto& trip : groups.members[g])
      acc += ec_triplet_estimate(panel, trip[0], trip[1], trip[2]);
    out[g] = acc / groups.members[g].size();
  }
  return out;
}

double gev_to_frechet(double z, const GevParams& g) {
  if (!(g.sigma > 0.0)) throw ConfigError("scale must be positive");
  double t = (z - g.mu) / g.sigma;
  if (std::abs(g.xi) < 1e-12) return std::exp(t);
  double w = 1.0 + g.xi * t;
  if (!(w > 0.0)) throw NumericError("value outside distribution support");
  return std::exp(std::log1p(g.xi * t) / g.xi);
}

double frechet_to_gev(double u, const GevParams& g) {
  if (!(g.sigma > 0.0)) throw ConfigError("scale must be positive");
  if (!(u > 0.0)) throw NumericError("value outside distribution support");
  if (std::abs(g.xi) < 1e-12) return g.mu + g.sigma * std::log(u);
  return g.mu + g.sigma * std::expm1(g.xi * std::log(u)) / g.xi;
}

}  // namespace lfi
