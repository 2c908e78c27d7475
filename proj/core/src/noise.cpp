#include "noise.hpp"

#include <algorithm>
#include <iterator>

#include "g2sim/rng.hpp"

namespace g2sim::detail {

void overlay_noise(const ExperimentConfig& cfg, std::uint64_t segment_index, std::uint64_t point,
                   SegmentClicks& segment) {
  constexpr std::array<StreamSlot, kChannelCount> slots{
      StreamSlot::noise_herald, StreamSlot::noise_one, StreamSlot::noise_two};
  for (Channel c : kChannels) {
    const double p = cfg.detectors.noise_probability(c);
    if (p <= 0.0) continue;
    RandomStream rng(cfg.seed, make_stream_id(slots[index(c)], segment_index, point));
    std::vector<std::uint32_t> noise;
    std::uint64_t bin = 0;
    while (bin < segment.bins) {
      const std::uint64_t skip = rng.geometric_failures(p);
      if (skip >= segment.bins - bin) break;
      bin += skip;
      noise.push_back(static_cast<std::uint32_t>(bin));
      ++bin;
    }
    if (noise.empty()) continue;
    auto& clicks = segment.bins_clicked[index(c)];
    std::vector<std::uint32_t> merged;
    merged.reserve(clicks.size() + noise.size());
    std::set_union(clicks.begin(), clicks.end(), noise.begin(), noise.end(),
                   std::back_inserter(merged));
    clicks = std::move(merged);
  }
}

}  // namespace g2sim::detail
