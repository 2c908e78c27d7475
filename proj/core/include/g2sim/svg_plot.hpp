#pragma once

#include <filesystem>
#include <string>

#include "g2sim/report.hpp"

namespace g2sim {

/// Self-contained SVG of g2(0) against the corrected signal rate.
///
/// Element classes, for structural checks:
///   circle.point-raw      raw estimates (one per plotted point)
///   rect.point-bgsub      background-subtracted estimates
///   path.errorbar         1-sigma bars
///   polygon.qm-band       band between the G = 1 and G = 2 predictions
///   line.fit              fitted line
///
/// Throws StatisticsError when the report has no plottable point.
std::string render_svg(const Report& report);

void save_svg(const std::filesystem::path& path, const Report& report);

}  // namespace g2sim
