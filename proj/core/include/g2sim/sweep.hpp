#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "g2sim/coincidence.hpp"
#include "g2sim/config.hpp"

namespace g2sim {

inline constexpr std::uint64_t kDefaultTargetTriples = 10000;

/// Attenuation sweep. INI dialect, one [sweep] section:
///   attenuations   = 1.0, 0.5, 0.25   (each in (0, 1])
///   target_triples = 10000            (stop a point once reached)
///   max_bins       = 1e9              (hard cap per point)
///   background_bins = 0               (source-off run for subtraction; 0 = none)
///   theory         = qm | pcsft       (optional, overrides the base config)
struct SweepPlan {
  std::vector<double> attenuations;
  std::uint64_t target_triples = kDefaultTargetTriples;
  std::uint64_t max_bins = 0;  ///< 0 = use the base config's n_bins
  std::uint64_t background_bins = 0;
  std::optional<Theory> theory;
};

/// Throws ConfigError listing every violated constraint.
void validate_plan(const SweepPlan& plan);
/// Non-fatal advisories (e.g. attenuations not strictly decreasing).
std::vector<std::string> plan_warnings(const SweepPlan& plan);

SweepPlan parse_plan(std::istream& in, const std::string& origin = "<input>");
SweepPlan load_plan(const std::filesystem::path& path);
std::string plan_to_ini(const SweepPlan& plan);

struct SweepPoint {
  double attenuation = 1.0;
  CoincidenceCounts counts;
  bool reached_target = false;
  std::optional<std::string> error;  ///< set when the point could not be simulated
};

struct SweepResult {
  ExperimentConfig base;  ///< validated base config with the plan's theory applied
  std::vector<SweepPoint> points;
  std::optional<CoincidenceCounts> background;
};

/// Config for point `i` of the plan: attenuation replaced, n_bins set to the
/// bin cap.
ExperimentConfig point_config(const ExperimentConfig& base, const SweepPlan& plan, double alpha);

/// Source-off config for the background run (pair mean or incident power 0).
ExperimentConfig background_config(const ExperimentConfig& base, const SweepPlan& plan);

/// Runs every point in order. Point i draws from stream point index i, the
/// background run from index attenuations.size(), so results do not depend
/// on `threads`. A failing point is recorded and the sweep continues.
SweepResult run_sweep(const ExperimentConfig& base, const SweepPlan& plan, unsigned threads = 1);

}  // namespace g2sim
