#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "g2sim/click_streams.hpp"

namespace g2sim {

/// Singles, same-bin pairs and same-bin triples. Raw counts are integral;
/// background-corrected counts may be fractional.
struct CountSet {
  double herald = 0;      ///< N_H
  double one = 0;         ///< N_1
  double two = 0;         ///< N_2
  double herald_one = 0;  ///< N_H1
  double herald_two = 0;  ///< N_H2
  double one_two = 0;     ///< N_12
  double triple = 0;      ///< N_H12

  CountSet& operator+=(const CountSet& o) noexcept;
  friend CountSet operator+(CountSet a, const CountSet& b) noexcept { return a += b; }
  bool operator==(const CountSet&) const = default;
};

struct SegmentCounts {
  std::uint64_t bins = 0;
  CountSet counts;
  bool partial = false;  ///< shorter than the nominal segment length

  bool operator==(const SegmentCounts&) const = default;
};

/// Mergeable FPGA-style accumulator: one entry per reporting segment plus
/// run totals.
struct CoincidenceCounts {
  double bin_width = 0.0;  ///< 0 only for the empty accumulator
  std::vector<SegmentCounts> segments;
  CountSet totals;
  std::uint64_t total_bins = 0;
  /// Per-field variance of `totals`. Absent means Poisson (variance = count).
  std::optional<CountSet> variance;
  /// Fields clamped at zero by background subtraction, e.g. "N_H12".
  std::vector<std::string> clamped;

  CountSet total_variance() const { return variance.value_or(totals); }
  double duration() const noexcept { return static_cast<double>(total_bins) * bin_width; }

  bool operator==(const CoincidenceCounts&) const = default;
};

/// Single pass over the bitmaps; segments of `segment_bins` bins (the last
/// one may be short and is flagged partial).
CoincidenceCounts accumulate(const ClickStreams& streams, std::uint64_t segment_bins);

/// Segments concatenated (a then b), totals summed. The empty accumulator is
/// an identity. Throws FormatError on a bin-width mismatch.
CoincidenceCounts merge(const CoincidenceCounts& a, const CoincidenceCounts& b);

/// Naive per-bin reference producing a single segment.
CoincidenceCounts brute_force_counts(const ClickStreams& streams);

/// Checks the count invariants (pairs within singles, triples within pairs,
/// totals equal to the sum of segments). Returns a description of the first
/// violation, if any.
std::optional<std::string> check_invariants(const CoincidenceCounts& counts);

// Counts CSV, one row per segment:
//   segment_index,bins,N_H,N_1,N_2,N_H1,N_H2,N_12,N_H12
// preceded by "# bin_width=<seconds>" and "# counts_version=1" comment lines.
inline constexpr int kCountsVersion = 1;

void write_counts_csv(std::ostream& out, const CoincidenceCounts& counts);
CoincidenceCounts read_counts_csv(std::istream& in);
void save_counts_csv(const std::filesystem::path& path, const CoincidenceCounts& counts);
CoincidenceCounts load_counts_csv(const std::filesystem::path& path);

/// JSON summary: bin width, total bins, segment count, totals and rates.
std::string counts_summary_json(const CoincidenceCounts& counts);

}  // namespace g2sim
