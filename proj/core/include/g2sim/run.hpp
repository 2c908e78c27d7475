#pragma once

#include <cstdint>

#include "g2sim/click_streams.hpp"
#include "g2sim/coincidence.hpp"
#include "g2sim/config.hpp"

namespace g2sim {

/// Simulates one segment under the configured theory.
SegmentClicks simulate_segment(const ExperimentConfig& cfg, std::uint64_t segment,
                               std::uint64_t point = 0);

/// Full run under the configured theory (validates first).
ClickStreams simulate(const ExperimentConfig& cfg, unsigned threads = 1);

/// Counts of a run simulated segment by segment without materializing the
/// whole stream. Segments are taken in index order and the run stops after
/// the first segment at which the triple total reaches `target_triples`
/// (0 = no target), or when cfg.n_bins is exhausted. The result depends only
/// on (cfg, point, target_triples), never on `threads`.
struct StreamedRun {
  CoincidenceCounts counts;
  bool reached_target = false;
};
StreamedRun run_counts(const ExperimentConfig& cfg, std::uint64_t target_triples,
                       std::uint64_t point = 0, unsigned threads = 1);

}  // namespace g2sim
