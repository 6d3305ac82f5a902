#pragma once

#include "lfi/rng.hpp"
#include "lfi/types.hpp"

#include <vector>

namespace lfi {

struct NormalLocationConfig {
  int N = 100;
  double mu = 0.0;
};

// y_i = mu + xi_i with xi_i iid standard normal drawn from the stream, so a
// fixed seed makes the model an exact location family in mu.
Dataset simulate_normal(const NormalLocationConfig& cfg, NoiseSeed xi);

// The noise vector alone; simulate_normal(cfg, xi) == cfg.mu + this.
Dataset normal_noise(int N, NoiseSeed xi);

enum class NormalSummary { mean, median, min, max, midrange };

// Selected summaries in the order given.  Median averages the middle pair for
// even lengths; midrange is (min + max) / 2.
SummaryStatistic summarize_normal(const Dataset& y, const std::vector<NormalSummary>& selector);

struct SIConfig {
  double beta = 1e-3;   // transmission rate per susceptible-infective pair per day
  double gamma = 0.1;   // removal rate per infective per day
  int S0 = 118;
  int I0 = 1;
  double T_end = 76.0;
};

enum class EventType { infection, removal };

struct EpidemicPath {
  std::vector<int> daily_obs;  // S(t)+I(t) at integer days t = 0..floor(T_end)
  std::vector<double> event_times;
  std::vector<EventType> event_types;
};

// Exact continuous-time simulation (next-event) with hazards beta*S*I and
// gamma*I.  daily_obs records the state after all events with time <= t.
EpidemicPath simulate_si(const SIConfig& cfg, NoiseSeed xi);

// Final recorded observation as a one-dimensional simple summary.
SummaryStatistic final_observation_summary(const EpidemicPath& path);

// daily_obs as a Dataset, the form the auxiliary likelihoods consume.
Dataset epidemic_dataset(const EpidemicPath& path);

}  // namespace lfi
