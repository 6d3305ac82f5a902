#include "lfi/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace lfi {

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_samples_csv(const std::string& path, const std::vector<WeightedSample>& samples,
                       const SamplesMeta& meta,
                       const std::vector<std::pair<std::string, std::vector<double>>>& extras) {
  for (const auto& [name, column] : extras) {
    if (column.size() != samples.size())
      throw ConfigError("extra column '" + name + "' length mismatch");
  }
  const int p = samples.empty() ? 0 : samples.front().theta.dim();

  std::ostringstream out;
  char hashbuf[20];
  std::snprintf(hashbuf, sizeof(hashbuf), "%016llx",
                static_cast<unsigned long long>(meta.config_hash));
  out << "# experiment=" << meta.experiment << " seed=" << meta.seed << " config=" << hashbuf
      << "\n";

  out << "iter";
  for (int j = 1; j <= p; ++j) out << ",theta_" << j;
  out << ",weight,rho";
  for (const auto& [name, column] : extras) out << "," << name;
  out << "\n";

  for (std::size_t i = 0; i < samples.size(); ++i) {
    const WeightedSample& s = samples[i];
    if (s.theta.dim() != p) throw ConfigError("ragged sample set");
    out << s.seed_id;
    for (int j = 0; j < p; ++j) out << "," << format_g17(s.theta.values[j]);
    out << "," << format_g17(s.weight) << "," << format_g17(s.discrepancy);
    for (const auto& [name, column] : extras) out << "," << format_g17(column[i]);
    out << "\n";
  }
  write_text_file(path, out.str());
}

void write_table_csv(const std::string& path, const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows) {
  if (columns.empty()) throw ConfigError("table needs columns");
  std::ostringstream out;
  for (std::size_t c = 0; c < columns.size(); ++c)
    out << (c ? "," : "") << columns[c];
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != columns.size()) throw ConfigError("ragged table row");
    for (std::size_t c = 0; c < row.size(); ++c)
      out << (c ? "," : "") << format_g17(row[c]);
    out << "\n";
  }
  write_text_file(path, out.str());
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << content;
  out.flush();
  if (!out) throw ConfigError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace lfi
