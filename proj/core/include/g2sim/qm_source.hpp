#pragma once

#include <cstdint>
#include <vector>

#include "g2sim/click_streams.hpp"
#include "g2sim/config.hpp"
#include "g2sim/rng.hpp"

namespace g2sim {

/// Mode factor G = 1 + 1/M in P(2) ~ (G/2) P(1)^2.
double g_factor(std::uint32_t mode_count);

/// Probability of exactly n pairs in a bin: negative binomial with shape M
/// and mean `mean` (M equal thermal modes of mean mean/M each).
double pair_prob(double mean, std::uint32_t mode_count, std::uint64_t n);

/// Exact inversion sampler for the pair-number distribution. The cumulative
/// table is extended on demand, so there is no photon-number cutoff.
class PairCountSampler {
 public:
  PairCountSampler(double mean, std::uint32_t mode_count);

  /// Unconditional draw.
  std::uint64_t operator()(RandomStream& rng) const;

  /// Draw conditioned on n >= 1.
  std::uint64_t sample_nonzero(RandomStream& rng) const;

  /// P(n >= 1).
  double nonzero_probability() const noexcept { return nonzero_; }

 private:
  std::uint64_t invert(double u, bool conditional) const;

  double mean_;
  std::uint32_t modes_;
  double ratio_;     // (mean/M) / (1 + mean/M)
  double vacuum_;    // pmf(0)
  double nonzero_;   // 1 - pmf(0), computed without cancellation
  std::vector<double> pmf_;  // pmf(0..K)
};

/// One draw of the pair number; see PairCountSampler for repeated draws.
std::uint64_t sample_pair_count(double mean, std::uint32_t mode_count, RandomStream& rng);

/// Heralded g2(0) from double pairs: 2 (P2/P1) (1 - (1-eta_h)^2)/eta_h with
/// P2 = (G/2) P1^2, i.e. G * P1 * (2 - eta_h).
double qm_g2_predicted(double single_pair_prob, double eta_herald, double g);

struct QmBand {
  double lower;  ///< many modes, G = 1
  double upper;  ///< single thermal mode, G = 2
};
QmBand qm_band(double single_pair_prob, double eta_herald);

/// Simulates one segment of a QM run. Streams used: (seed, make_stream_id(slot,
/// segment, point)) for the source and the three noise slots.
SegmentClicks simulate_qm_segment(const ExperimentConfig& cfg, std::uint64_t segment,
                                  std::uint64_t point = 0);

/// Full QM run. Output is independent of `threads`.
ClickStreams simulate_run(const ExperimentConfig& cfg, unsigned threads = 1);

}  // namespace g2sim
