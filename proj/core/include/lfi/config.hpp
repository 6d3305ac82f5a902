#pragma once

#include "lfi/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace lfi {

// Sectioned key=value configuration.  '#' starts a comment, keys before any
// [section] header land in the "" section, duplicate keys are rejected.
class ConfigFile {
 public:
  static ConfigFile parse_text(const std::string& text, const std::string& name = "<config>");
  static ConfigFile parse_file(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;

  std::string get_str(const std::string& section, const std::string& key) const;
  std::string get_str(const std::string& section, const std::string& key,
                      const std::string& fallback) const;
  double get_num(const std::string& section, const std::string& key) const;
  double get_num(const std::string& section, const std::string& key, double fallback) const;
  long long get_int(const std::string& section, const std::string& key) const;
  long long get_int(const std::string& section, const std::string& key, long long fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

  // Schema gate: the top-level `schema` key must equal the supported version.
  void require_schema(long long version) const;

  // Every key of `section` must appear in `allowed`; unknown keys are
  // configuration errors, not silently ignored knobs.
  void restrict_keys(const std::string& section, const std::vector<std::string>& allowed) const;
  void restrict_sections(const std::vector<std::string>& allowed) const;

  const std::string& name() const { return name_; }
  const std::string& text() const { return text_; }

 private:
  std::string name_;
  std::string text_;  // verbatim input, hashed into output headers
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

}  // namespace lfi
