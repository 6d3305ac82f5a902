#include "lfi/models.hpp"

#include <algorithm>
#include <cmath>

namespace lfi {

Dataset normal_noise(int N, NoiseSeed xi) {
  if (N < 1) throw ConfigError("dataset length must be >= 1");
  RngStream rng(xi);
  Dataset out(static_cast<std::size_t>(N));
  for (auto& v : out) v = rng.normal();
  return out;
}

Dataset simulate_normal(const NormalLocationConfig& cfg, NoiseSeed xi) {
  Dataset out = normal_noise(cfg.N, xi);
  for (auto& v : out) v += cfg.mu;
  return out;
}

namespace {

double summary_value(const Dataset& y, NormalSummary which) {
  switch (which) {
    case NormalSummary::mean: {
      double acc = 0.0;
      for (double v : y) acc += v;
      return acc / static_cast<double>(y.size());
    }
    case NormalSummary::median: {
      Dataset s = y;
      std::sort(s.begin(), s.end());
      std::size_t n = s.size();
      return n % 2 == 1 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
    }
    case NormalSummary::min:
      return *std::min_element(y.begin(), y.end());
    case NormalSummary::max:
      return *std::max_element(y.begin(), y.end());
    case NormalSummary::midrange:
      return 0.5 * (*std::min_element(y.begin(), y.end()) +
                    *std::max_element(y.begin(), y.end()));
  }
  throw ConfigError("unknown summary selector");
}

}  // namespace

SummaryStatistic summarize_normal(const Dataset& y, const std::vector<NormalSummary>& selector) {
  if (y.empty()) throw ConfigError("summarize_normal: empty dataset");
  if (selector.empty()) throw ConfigError("summarize_normal: empty selector");
  Vector v(static_cast<int>(selector.size()));
  for (std::size_t i = 0; i < selector.size(); ++i)
    v[static_cast<int>(i)] = summary_value(y, selector[i]);
  return SummaryStatistic(std::move(v), SummaryKind::simple);
}

EpidemicPath simulate_si(const SIConfig& cfg, NoiseSeed xi) {
  if (cfg.beta < 0.0 || cfg.gamma < 0.0 || cfg.S0 < 0 || cfg.I0 < 0 || cfg.T_end <= 0.0)
    throw ConfigError("invalid SI configuration");
  if (cfg.S0 + cfg.I0 < 1) throw ConfigError("SI model needs at least one individual");

  RngStream rng(xi);
  EpidemicPath path;
  int S = cfg.S0;
  int I = cfg.I0;
  double t = 0.0;
  while (true) {
    double a_inf = cfg.beta * static_cast<double>(S) * static_cast<double>(I);
    double a_rem = cfg.gamma * static_cast<double>(I);
    double a0 = a_inf + a_rem;
    if (a0 <= 0.0) break;  // absorbed: I == 0 or no event possible
    t += rng.exponential(a0);
    if (t > cfg.T_end) break;
    if (rng.uniform01() * a0 < a_inf) {
      --S;
      ++I;
      path.event_types.push_back(EventType::infection);
    } else {
      --I;
      path.event_types.push_back(EventType::removal);
    }
    path.event_times.push_back(t);
  }

  int days = static_cast<int>(std::floor(cfg.T_end));
  path.daily_obs.resize(static_cast<std::size_t>(days) + 1);
  int removals = 0;
  std::size_t e = 0;
  for (int d = 0; d <= days; ++d) {
    while (e < path.event_times.size() && path.event_times[e] <= static_cast<double>(d)) {
      if (path.event_types[e] == EventType::removal) ++removals;
      ++e;
    }
    path.daily_obs[static_cast<std::size_t>(d)] = cfg.S0 + cfg.I0 - removals;
  }
  return path;
}

SummaryStatistic final_observation_summary(const EpidemicPath& path) {
  if (path.daily_obs.empty()) throw ConfigError("empty epidemic path");
  Vector v(1);
  v[0] = static_cast<double>(path.daily_obs.back());
  return SummaryStatistic(std::move(v), SummaryKind::simple);
}

Dataset epidemic_dataset(const EpidemicPath& path) {
  Dataset out(path.daily_obs.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(path.daily_obs[i]);
  return out;
}

}  // namespace lfi
