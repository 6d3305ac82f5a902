#pragma once

#include "lfi/config.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lfi {

struct RunRequest {
  std::string experiment;
  ConfigFile config;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string output_dir = "out";
};

struct RunOutcome {
  std::vector<std::string> files_written;
};

const std::vector<std::string>& experiment_names();

// Runs one named experiment end to end: validates the configuration, draws the
// synthetic observation, runs the sampler or estimator, and writes samples.csv
// plus diagnostics.json (and grids/ where applicable) under output_dir.
// samples.csv is byte-identical across reruns with the same config and seed.
// Partially written outputs are removed before an exception escapes.
RunOutcome run_experiment(const RunRequest& req);

}  // namespace lfi
