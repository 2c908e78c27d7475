#include "g2sim/config_io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <limits>
#include <optional>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "g2sim/errors.hpp"

namespace g2sim {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string qualified(const std::string& section, const std::string& key) {
  return section + "." + key;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

IniDocument IniDocument::parse(std::istream& in, const std::string& origin) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  IniDocument doc;
  doc.origin_ = origin;
  std::vector<std::string> problems;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      problems.push_back(section + ": key outside of any section");
      continue;
    }
    auto& dest = doc.values_[section];
    for (const auto& [key, node] : body) {
      if (!node.empty()) {
        problems.push_back(qualified(section, key) + ": nested keys are not supported");
        continue;
      }
      dest[key] = trim(node.data());
    }
  }
  if (!problems.empty()) throw ConfigError(problems);
  return doc;
}

IniDocument IniDocument::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open file");
  return parse(in, path.string());
}

bool IniDocument::has_section(const std::string& section) const {
  return values_.contains(section);
}

bool IniDocument::has(const std::string& section, const std::string& key) const {
  const auto it = values_.find(section);
  return it != values_.end() && it->second.contains(key);
}

std::optional<std::string> IniDocument::take(const std::string& section, const std::string& key) {
  const auto it = values_.find(section);
  if (it == values_.end()) return std::nullopt;
  const auto kv = it->second.find(key);
  if (kv == it->second.end()) return std::nullopt;
  consumed_.emplace(section, key);
  return kv->second;
}

std::optional<double> IniDocument::take_double(const std::string& section,
                                               const std::string& key) {
  auto raw = take(section, key);
  if (!raw) return std::nullopt;
  double v = 0.0;
  const char* first = raw->data();
  const char* last = first + raw->size();
  if (!raw->empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (raw->empty() || ec != std::errc{} || ptr != last) {
    throw ConfigError(qualified(section, key) + ": expected a number (got '" + *raw + "')");
  }
  return v;
}

std::optional<std::uint64_t> IniDocument::take_u64(const std::string& section,
                                                   const std::string& key) {
  auto raw = take(section, key);
  if (!raw) return std::nullopt;
  std::uint64_t v = 0;
  const char* first = raw->data();
  const char* last = first + raw->size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (raw->empty() || ec != std::errc{} || ptr != last) {
    // Accept integral values written in floating notation, e.g. 1e8.
    double d = 0.0;
    const auto [dptr, dec] = std::from_chars(first, last, d);
    if (dec == std::errc{} && dptr == last && d >= 0.0 && d < 1.8e19 && std::floor(d) == d) {
      return static_cast<std::uint64_t>(d);
    }
    throw ConfigError(qualified(section, key) + ": expected a non-negative integer (got '" +
                      *raw + "')");
  }
  return v;
}

std::optional<bool> IniDocument::take_bool(const std::string& section, const std::string& key) {
  auto raw = take(section, key);
  if (!raw) return std::nullopt;
  if (*raw == "true" || *raw == "1" || *raw == "yes" || *raw == "on") return true;
  if (*raw == "false" || *raw == "0" || *raw == "no" || *raw == "off") return false;
  throw ConfigError(qualified(section, key) + ": expected true/false (got '" + *raw + "')");
}

void IniDocument::reject_leftovers(const std::set<std::string>& known_sections) const {
  std::vector<std::string> problems;
  for (const auto& [section, body] : values_) {
    if (!known_sections.contains(section)) {
      problems.push_back("[" + section + "]: unknown section");
      continue;
    }
    for (const auto& [key, value] : body) {
      if (!consumed_.contains({section, key})) {
        problems.push_back(qualified(section, key) + ": unknown key");
      }
    }
  }
  if (!problems.empty()) throw ConfigError(problems);
}

ExperimentConfig parse_config(std::istream& in, const std::string& origin) {
  IniDocument doc = IniDocument::parse(in, origin);
  ExperimentConfig cfg;

  auto set_double = [&doc](const char* section, const char* key, double& field) {
    if (auto v = doc.take_double(section, key)) field = *v;
  };

  set_double("source", "pair_mean_per_bin", cfg.source.pair_mean_per_bin);
  if (auto v = doc.take_u64("source", "mode_count")) {
    if (*v > std::numeric_limits<std::uint32_t>::max()) {
      throw ConfigError("source.mode_count: value too large");
    }
    cfg.source.mode_count = static_cast<std::uint32_t>(*v);
  }

  set_double("optics", "attenuation", cfg.optics.attenuation);
  set_double("optics", "splitter_ratio", cfg.optics.splitter_ratio);
  set_double("optics", "eta_h", cfg.optics.eta_herald);
  set_double("optics", "eta_1", cfg.optics.eta_1);
  set_double("optics", "eta_2", cfg.optics.eta_2);

  set_double("detectors", "bin_width", cfg.detectors.bin_width);
  // Shorthands apply to all channels; per-channel keys override them.
  if (auto v = doc.take_double("detectors", "dark_rate")) {
    for (auto& n : cfg.detectors.noise) n.dark_rate = *v;
  }
  if (auto v = doc.take_double("detectors", "background_rate")) {
    for (auto& n : cfg.detectors.noise) n.background_rate = *v;
  }
  for (Channel c : kChannels) {
    const std::string suffix = "_" + std::string(channel_name(c));
    auto& n = cfg.detectors.noise[index(c)];
    set_double("detectors", ("dark_rate" + suffix).c_str(), n.dark_rate);
    set_double("detectors", ("background_rate" + suffix).c_str(), n.background_rate);
  }

  if (doc.has_section("pcsft")) {
    PcsftConfig p;
    set_double("pcsft", "threshold_energy", p.threshold_energy);
    set_double("pcsft", "pulse_duration", p.pulse_duration);
    set_double("pcsft", "incident_power", p.incident_power);
    set_double("pcsft", "diffusion_step", p.diffusion_step);
    if (auto v = doc.take_bool("pcsft", "thermal_envelope")) p.thermal_envelope = *v;
    cfg.pcsft = p;
  }

  if (auto v = doc.take("run", "theory")) cfg.theory = parse_theory(*v);
  if (auto v = doc.take_u64("run", "n_bins")) cfg.n_bins = *v;
  if (auto v = doc.take_u64("run", "segment_bins")) cfg.segment_bins = *v;
  if (auto v = doc.take_u64("run", "seed")) cfg.seed = *v;

  doc.reject_leftovers({"source", "optics", "detectors", "pcsft", "run"});
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open file");
  return parse_config(in, path.string());
}

void write_config(std::ostream& out, const ExperimentConfig& cfg) {
  const auto d = format_double;
  out << "[source]\n"
      << "pair_mean_per_bin = " << d(cfg.source.pair_mean_per_bin) << "\n"
      << "mode_count = " << cfg.source.mode_count << "\n\n";
  out << "[optics]\n"
      << "attenuation = " << d(cfg.optics.attenuation) << "\n"
      << "splitter_ratio = " << d(cfg.optics.splitter_ratio) << "\n"
      << "eta_h = " << d(cfg.optics.eta_herald) << "\n"
      << "eta_1 = " << d(cfg.optics.eta_1) << "\n"
      << "eta_2 = " << d(cfg.optics.eta_2) << "\n\n";
  out << "[detectors]\n"
      << "bin_width = " << d(cfg.detectors.bin_width) << "\n";
  for (Channel c : kChannels) {
    const auto& n = cfg.detectors.noise[index(c)];
    out << "dark_rate_" << channel_name(c) << " = " << d(n.dark_rate) << "\n"
        << "background_rate_" << channel_name(c) << " = " << d(n.background_rate) << "\n";
  }
  out << "\n";
  if (cfg.pcsft) {
    const auto& p = *cfg.pcsft;
    out << "[pcsft]\n"
        << "threshold_energy = " << d(p.threshold_energy) << "\n"
        << "pulse_duration = " << d(p.pulse_duration) << "\n"
        << "incident_power = " << d(p.incident_power) << "\n"
        << "diffusion_step = " << d(p.diffusion_step) << "\n"
        << "thermal_envelope = " << (p.thermal_envelope ? "true" : "false") << "\n\n";
  }
  out << "[run]\n"
      << "theory = " << theory_name(cfg.theory) << "\n"
      << "n_bins = " << cfg.n_bins << "\n"
      << "segment_bins = " << cfg.segment_bins << "\n"
      << "seed = " << cfg.seed << "\n";
}

std::string to_ini(const ExperimentConfig& cfg) {
  std::ostringstream os;
  write_config(os, cfg);
  return os.str();
}

}  // namespace g2sim
