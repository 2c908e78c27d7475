#pragma once

#include <cstdint>

#include "g2sim/click_streams.hpp"
#include "g2sim/config.hpp"

namespace g2sim::detail {

/// ORs per-bin dark + background clicks into each channel of `segment`,
/// drawing from the segment's noise streams.
void overlay_noise(const ExperimentConfig& cfg, std::uint64_t segment_index, std::uint64_t point,
                   SegmentClicks& segment);

}  // namespace g2sim::detail
