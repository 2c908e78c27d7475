#pragma once

#include <filesystem>
#include <iosfwd>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "g2sim/config.hpp"

namespace g2sim {

/// Sectioned key/value text as read from an INI file. Tracks which keys were
/// consumed so that leftovers can be reported as errors.
class IniDocument {
 public:
  static IniDocument parse(std::istream& in, const std::string& origin = "<input>");
  static IniDocument load(const std::filesystem::path& path);

  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;

  /// Raw value; marks the key as consumed.
  std::optional<std::string> take(const std::string& section, const std::string& key);

  std::optional<double> take_double(const std::string& section, const std::string& key);
  std::optional<std::uint64_t> take_u64(const std::string& section, const std::string& key);
  std::optional<bool> take_bool(const std::string& section, const std::string& key);

  /// Throws ConfigError naming every unconsumed key and every section outside `known`.
  void reject_leftovers(const std::set<std::string>& known_sections) const;

  const std::string& origin() const { return origin_; }

 private:
  std::string origin_;
  std::map<std::string, std::map<std::string, std::string>> values_;
  std::set<std::pair<std::string, std::string>> consumed_;
};

ExperimentConfig parse_config(std::istream& in, const std::string& origin = "<input>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Writes every field; parse_config(write_config(c)) reproduces c exactly.
void write_config(std::ostream& out, const ExperimentConfig& cfg);
std::string to_ini(const ExperimentConfig& cfg);

}  // namespace g2sim
