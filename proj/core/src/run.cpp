#include "g2sim/run.hpp"

#include <algorithm>
#include <vector>

#include "g2sim/parallel.hpp"
#include "g2sim/pcsft_model.hpp"
#include "g2sim/qm_source.hpp"

namespace g2sim {

SegmentClicks simulate_segment(const ExperimentConfig& cfg, std::uint64_t segment,
                               std::uint64_t point) {
  return cfg.theory == Theory::pcsft ? simulate_pcsft_segment(cfg, segment, point)
                                     : simulate_qm_segment(cfg, segment, point);
}

ClickStreams simulate(const ExperimentConfig& cfg, unsigned threads) {
  return cfg.theory == Theory::pcsft ? simulate_pcsft_run(cfg, threads)
                                     : simulate_run(cfg, threads);
}

StreamedRun run_counts(const ExperimentConfig& cfg, std::uint64_t target_triples,
                       std::uint64_t point, unsigned threads) {
  const ExperimentConfig valid = validate_config(cfg);
  const std::uint64_t n_segments = valid.segment_count();
  const std::size_t batch = std::max<std::size_t>(1, std::max(1U, threads)) * 8;

  StreamedRun run;
  run.counts.bin_width = valid.detectors.bin_width;
  std::vector<SegmentCounts> pending;
  for (std::uint64_t first = 0; first < n_segments && !run.reached_target; first += batch) {
    const std::size_t count = static_cast<std::size_t>(std::min<std::uint64_t>(batch, n_segments - first));
    pending.assign(count, {});
    parallel_for(count, threads, [&](std::size_t i) {
      const SegmentClicks clicks = simulate_segment(valid, first + i, point);
      ClickStreams streams(clicks.bins, valid.detectors.bin_width);
      write_segment(streams, {0, clicks.bins, clicks.bins_clicked});
      const CoincidenceCounts c = accumulate(streams, clicks.bins);
      pending[i] = c.segments.front();
      pending[i].partial = clicks.bins < valid.segment_bins;
    });
    for (const auto& seg : pending) {
      run.counts.segments.push_back(seg);
      run.counts.totals += seg.counts;
      run.counts.total_bins += seg.bins;
      if (target_triples > 0 && run.counts.totals.triple >= static_cast<double>(target_triples)) {
        run.reached_target = true;
        break;
      }
    }
  }
  return run;
}

}  // namespace g2sim
