#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "g2sim/analysis.hpp"
#include "g2sim/coincidence.hpp"
#include "g2sim/config.hpp"
#include "g2sim/sweep.hpp"

namespace g2sim {

inline constexpr int kReportVersion = 1;

struct ReportPoint {
  std::string label;
  std::optional<double> attenuation;
  std::optional<G2Estimate> raw;
  std::optional<G2Estimate> corrected;  ///< background-subtracted
  std::optional<double> bound_counts;
  std::optional<double> bound_energy;
  std::optional<bool> reached_target;
  std::vector<std::string> flags;  ///< "upper_limit", "clamped:N_H12", ...
  std::optional<std::string> error;
};

struct BandSample {
  double x = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct Report {
  std::string theory;
  double bin_width = 0.0;
  double eta_herald = 0.0;
  double eta_1 = 0.0;
  double eta_2 = 0.0;
  double single_pair_prob = 0.0;  ///< P(1) used for the band
  double pulse_duration = 0.0;    ///< delta used for the bounds
  bool background_subtracted = false;
  std::string estimator;  ///< "segmented" or "pooled"
  std::vector<ReportPoint> points;
  std::string fit_series;  ///< "raw" or "background_subtracted"
  std::optional<FitResult> fit;
  std::string fit_note;
  std::vector<BandSample> band;
};

struct AnalysisInput {
  std::string label;
  std::optional<double> attenuation;
  CoincidenceCounts counts;
  std::optional<bool> reached_target;
  std::optional<std::string> error;
};

struct ReportOptions {
  /// Segments per block for segmented_g2; 0 pools the whole run.
  std::size_t block_segments = kDefaultBlockSegments;
};

/// Full analysis of a set of runs: g2 estimates (raw and, with a background
/// run, background-subtracted), corrected rates, the weighted fit over the
/// subtracted series when present (raw otherwise), QM band samples at each x
/// and the classical-field bounds per point. Raw estimates use segmented_g2;
/// subtracted ones pool the run because only totals carry a variance.
/// Points that cannot be estimated keep their error and are left out of the fit.
Report build_report(const std::vector<AnalysisInput>& inputs,
                    const std::optional<CoincidenceCounts>& background,
                    const ExperimentConfig& cfg, const ReportOptions& options = {});

Report build_report(const SweepResult& sweep, const ReportOptions& options = {});

/// True when any point carries an error.
bool has_failures(const Report& report);

void write_report_json(std::ostream& out, const Report& report);
Report read_report_json(std::istream& in);
void save_report_json(const std::filesystem::path& path, const Report& report);
Report load_report_json(const std::filesystem::path& path);

/// One row per point with the quantities plotted against the corrected rate.
void write_report_csv(std::ostream& out, const Report& report);
void save_report_csv(const std::filesystem::path& path, const Report& report);

}  // namespace g2sim
