#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "g2sim/config.hpp"

namespace g2sim {

/// Per-bin click record of the three detectors, stored as packed bitmaps
/// (bit i of word i/64 is bin i). Bits past n_bins are always zero.
class ClickStreams {
 public:
  ClickStreams() = default;
  ClickStreams(std::uint64_t n_bins, double bin_width);

  std::uint64_t n_bins() const noexcept { return n_bins_; }
  double bin_width() const noexcept { return bin_width_; }
  std::size_t word_count() const noexcept { return words_[0].size(); }

  bool click(Channel c, std::uint64_t bin) const noexcept {
    return (words_[index(c)][bin >> 6] >> (bin & 63)) & 1U;
  }
  void set(Channel c, std::uint64_t bin) noexcept {
    words_[index(c)][bin >> 6] |= std::uint64_t{1} << (bin & 63);
  }

  std::span<const std::uint64_t> words(Channel c) const noexcept { return words_[index(c)]; }
  std::span<std::uint64_t> words(Channel c) noexcept { return words_[index(c)]; }

  /// Number of bins in which channel `c` clicked.
  std::uint64_t count(Channel c) const noexcept;

  /// Clears all bits, keeping the size.
  void clear() noexcept;

  bool operator==(const ClickStreams&) const = default;

 private:
  std::uint64_t n_bins_ = 0;
  double bin_width_ = 0.0;
  std::array<std::vector<std::uint64_t>, kChannelCount> words_{};
};

/// Sparse clicks produced by simulating one segment: sorted local bin indices
/// per channel.
struct SegmentClicks {
  std::uint64_t first_bin = 0;
  std::uint64_t bins = 0;
  std::array<std::vector<std::uint32_t>, kChannelCount> bins_clicked{};
};

/// ORs a simulated segment into `streams` at its absolute position.
void write_segment(ClickStreams& streams, const SegmentClicks& segment);

// "PSTM" v1 binary format, all fields little-endian:
//   char[4]  magic "PSTM"
//   u32      version (1)
//   u64      n_bins
//   f64      bin_width in seconds (IEEE-754 binary64)
//   u32      channel count (3: herald, 1, 2)
//   per channel: ceil(n_bins / 64) u64 words, LSB = earliest bin
inline constexpr std::uint32_t kPstmVersion = 1;

void write_pstm(std::ostream& out, const ClickStreams& streams);
ClickStreams read_pstm(std::istream& in);
void save_pstm(const std::filesystem::path& path, const ClickStreams& streams);
ClickStreams load_pstm(const std::filesystem::path& path);

/// Debug export: header "channel,bin_index", one row per click, channels in
/// order h, 1, 2 and bins ascending within a channel.
void write_click_csv(std::ostream& out, const ClickStreams& streams);

}  // namespace g2sim
