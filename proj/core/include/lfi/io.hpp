#pragma once

#include "lfi/types.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace lfi {

// FNV-1a, used to stamp outputs with the configuration they came from.
std::uint64_t fnv1a64(const std::string& text);

// Shortest text that round-trips a double would vary in width; %.17g is
// deterministic and lossless, which is what byte-identical reruns need.
std::string format_g17(double x);

struct SamplesMeta {
  std::string experiment;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
};

// samples.csv: a '#' provenance comment, then
// iter,theta_1..theta_p,weight,rho[,extras...] with one row per sample.
void write_samples_csv(const std::string& path, const std::vector<WeightedSample>& samples,
                       const SamplesMeta& meta,
                       const std::vector<std::pair<std::string, std::vector<double>>>& extras = {});

void write_table_csv(const std::string& path, const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace lfi
