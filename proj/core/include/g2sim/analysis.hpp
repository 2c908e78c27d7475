#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "g2sim/coincidence.hpp"
#include "g2sim/config.hpp"

namespace g2sim {

/// Heralded g2(0) with its 1-sigma statistical uncertainty.
struct G2Estimate {
  double value = 0.0;
  double sigma = 0.0;
  /// True when no triples were seen: value is 0 and sigma is the uncertainty
  /// a single triple would carry.
  bool upper_limit = false;
  CountSet counts;             ///< totals the estimate was formed from
  CountSet variance;           ///< variance of those totals
  std::uint64_t bins = 0;
  double bin_width = 0.0;
  double x_rate = 0.0;         ///< efficiency-corrected signal-arm rate, 1/s (0 until set)
  double x_sigma = 0.0;
};

/// g2 = N_H N_H12 / (N_H1 N_H2), relative variance summed over the four
/// counts (independent Poisson unless `counts.variance` says otherwise).
/// Throws StatisticsError when N_H1 or N_H2 is not positive.
G2Estimate heralded_g2(const CoincidenceCounts& counts);

inline constexpr std::size_t kDefaultBlockSegments = 100;

/// g2 per block of `block_segments` consecutive segments, combined by
/// inverse-variance weighting. Block weights use the triples expected from
/// the pooled g2 rather than each block's own triple count, so a block's
/// weight does not depend on its fluctuation. Blocks without N_H1 and N_H2
/// are skipped.
G2Estimate segmented_g2(const CoincidenceCounts& counts,
                        std::size_t block_segments = kDefaultBlockSegments);

struct EfficiencyEstimate {
  double value = 0.0;
  double sigma = 0.0;
};

struct KlyshkoResult {
  EfficiencyEstimate eta_1;
  EfficiencyEstimate eta_2;
  EfficiencyEstimate eta_herald;  ///< (N_H1 + N_H2) / (N_1 + N_2)
};

/// Correlated-photon calibration: eta_i = N_Hi / (N_H * share_i), with
/// binomial sigma sqrt(p (1 - p) / N_H) / share_i where p = N_Hi / N_H.
/// `path_share` is the known transmission in front of each detector
/// (attenuator times splitter share); the default of 1 gives the plain ratio.
/// When `counts.variance` exceeds the Poisson level (background-subtracted
/// input) the excess is added to the binomial variance.
/// Throws StatisticsError when N_H is zero.
KlyshkoResult klyshko_efficiency(const CoincidenceCounts& counts,
                                 std::array<double, 2> path_share = {1.0, 1.0});

/// Removes the expected background from a signal run. Singles lose the
/// bin-scaled background singles; pairs and triples also lose first-order
/// accidentals (a corrected lower-order count times a background per-bin
/// probability). Negative results are clamped to zero and listed in
/// `clamped`. Variances add the scaled background variance.
/// Throws FormatError on a bin-width mismatch and StatisticsError when the
/// background run is empty.
CoincidenceCounts background_subtract(const CoincidenceCounts& signal,
                                      const CoincidenceCounts& background);

struct FitPoint {
  double x = 0.0;
  double y = 0.0;
  double sigma = 0.0;
};

struct FitResult {
  double slope = 0.0;      ///< A
  double intercept = 0.0;  ///< B
  std::array<std::array<double, 2>, 2> covariance{};  ///< (A, B)
  double chi2 = 0.0;
  double reduced_chi2 = 0.0;
  int dof = 0;

  double slope_sigma() const;
  double intercept_sigma() const;
};

/// Weighted least squares for y = A x + B with weights 1/sigma^2.
/// Throws StatisticsError for fewer than 3 points or a non-positive sigma and
/// DomainError when all x coincide.
FitResult weighted_linear_fit(const std::vector<FitPoint>& points);

struct RateEstimate {
  double value = 0.0;
  double sigma = 0.0;
};

/// Efficiency-corrected rate of heralded photons incident on the signal arm:
/// (N_H1 / eta_1 + N_H2 / eta_2) / total_time. The splitter shares sum to one,
/// so undoing each detector's efficiency and adding the two paths recovers
/// the rate in front of the splitter.
RateEstimate corrected_rate(const CoincidenceCounts& counts, const OpticsConfig& optics,
                            double total_time);

/// Fills x_rate / x_sigma of `estimate` from corrected_rate.
void attach_rate(G2Estimate& estimate, const OpticsConfig& optics);

}  // namespace g2sim
