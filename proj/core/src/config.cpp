#include "lfi/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace lfi {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& name, int line, const std::string& what) {
  throw ConfigError(name + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

ConfigFile ConfigFile::parse_text(const std::string& text, const std::string& name) {
  ConfigFile cfg;
  cfg.name_ = name;
  cfg.text_ = text;

  std::istringstream in(text);
  std::string raw;
  std::string section;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(name, lineno, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail(name, lineno, "empty section name");
      continue;
    }

    auto eq = line.find('=');
    if (eq == std::string::npos) fail(name, lineno, "expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(name, lineno, "empty key");
    auto& sec = cfg.sections_[section];
    if (sec.count(key)) fail(name, lineno, "duplicate key '" + key + "'");
    sec[key] = value;
  }
  return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  auto it = sections_.find(section);
  return it != sections_.end() && it->second.count(key) > 0;
}

std::string ConfigFile::get_str(const std::string& section, const std::string& key) const {
  auto it = sections_.find(section);
  if (it != sections_.end()) {
    auto kt = it->second.find(key);
    if (kt != it->second.end()) return kt->second;
  }
  throw ConfigError(name_ + ": missing key '" + key + "' in section [" + section + "]");
}

std::string ConfigFile::get_str(const std::string& section, const std::string& key,
                                const std::string& fallback) const {
  return has(section, key) ? get_str(section, key) : fallback;
}

double ConfigFile::get_num(const std::string& section, const std::string& key) const {
  std::string v = get_str(section, key);
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError(name_ + ": key '" + key + "' in [" + section + "] is not a number: " + v);
  return x;
}

double ConfigFile::get_num(const std::string& section, const std::string& key,
                           double fallback) const {
  return has(section, key) ? get_num(section, key) : fallback;
}

long long ConfigFile::get_int(const std::string& section, const std::string& key) const {
  std::string v = get_str(section, key);
  char* end = nullptr;
  long long x = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError(name_ + ": key '" + key + "' in [" + section + "] is not an integer: " + v);
  return x;
}

long long ConfigFile::get_int(const std::string& section, const std::string& key,
                              long long fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key,
                          bool fallback) const {
  if (!has(section, key)) return fallback;
  std::string v = get_str(section, key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(name_ + ": key '" + key + "' in [" + section + "] is not a boolean: " + v);
}

void ConfigFile::require_schema(long long version) const {
  if (!has("", "schema"))
    throw ConfigError(name_ + ": missing top-level 'schema' key");
  long long got = get_int("", "schema");
  if (got != version)
    throw ConfigError(name_ + ": unsupported schema " + std::to_string(got) + ", expected " +
                      std::to_string(version));
}

void ConfigFile::restrict_keys(const std::string& section,
                               const std::vector<std::string>& allowed) const {
  auto it = sections_.find(section);
  if (it == sections_.end()) return;
  for (const auto& [key, value] : it->second) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(name_ + ": unknown key '" + key + "' in section [" + section + "]");
  }
}

void ConfigFile::restrict_sections(const std::vector<std::string>& allowed) const {
  for (const auto& [section, keys] : sections_) {
    if (std::find(allowed.begin(), allowed.end(), section) == allowed.end())
      throw ConfigError(name_ + ": unknown section [" + section + "]");
  }
}

}  // namespace lfi
