#pragma once

// Deterministic random streams.
//
// Every stream is Philox4x32-10 (Salmon, Moraes, Dror, Shaw; SC'11) keyed by
// the 64-bit run seed. The 128-bit counter is split into a 64-bit block index
// (low words) and the 64-bit stream id (high words), so any (seed, stream_id)
// pair addresses a disjoint, reproducible sequence on every platform.
//
// Derived variates:
//   uniform()  53-bit mantissa from two consecutive 32-bit words (hi, lo)
//   normal()   128-layer Marsaglia-Tsang ziggurat on one 32-bit word
//              (7 index bits, 25 signed value bits)
//   gamma()    Marsaglia-Tsang squeeze method
//
// Stream ids used by the simulators are composed with make_stream_id().

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace g2sim {

/// One Philox4x32-10 block: maps (counter, key) to four 32-bit words.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

namespace detail {
struct ZigguratTables {
  std::array<std::uint32_t, 128> k;
  std::array<double, 128> w;
  std::array<double, 128> f;
};
const ZigguratTables& ziggurat_tables() noexcept;
}  // namespace detail

class RandomStream {
 public:
  using result_type = std::uint32_t;

  RandomStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return next_u32(); }

  std::uint32_t next_u32() noexcept {
    if (pos_ == buffer_.size()) refill();
    return buffer_[pos_++];
  }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe as a logarithm argument.
  double uniform_pos() noexcept { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Standard normal variate.
  double normal() noexcept {
    const std::uint32_t u = next_u32();
    const std::int32_t j = static_cast<std::int32_t>(u) >> 7;
    const std::uint32_t i = u & 127U;
    const auto& t = detail::ziggurat_tables();
    const std::uint32_t mag = static_cast<std::uint32_t>(j < 0 ? -static_cast<std::int64_t>(j) : j);
    if (mag < t.k[i]) return static_cast<double>(j) * t.w[i];
    return normal_slow(j, i);
  }

  /// Number of failures before the first success of a Bernoulli(p) sequence.
  /// Returns max() when p == 0.
  std::uint64_t geometric_failures(double p) noexcept;

  /// Gamma variate with the given shape and unit scale.
  double gamma(double shape) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

 private:
  static constexpr std::size_t kBlocksPerRefill = 16;

  void refill() noexcept;
  double normal_slow(std::int32_t j, std::uint32_t i) noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4 * kBlocksPerRefill> buffer_{};
  std::size_t pos_ = buffer_.size();
};

/// Deterministic stream for (seed, stream_id); identical pairs give
/// bit-identical sequences.
inline RandomStream rng_stream(std::uint64_t seed, std::uint64_t stream_id) noexcept {
  return RandomStream(seed, stream_id);
}

/// Roles of the per-segment streams. The slot is the low byte of the id.
enum class StreamSlot : std::uint8_t {
  source = 0,          // pair generation, losses and splitting
  noise_herald = 1,    // dark + background, herald detector
  noise_one = 2,
  noise_two = 3,
  field_herald = 4,    // classical-field diffusion, herald arm
  field_signal = 5,    // classical-field diffusion, signal arm
  field_envelope = 6,  // common per-bin intensity multiplier
};

/// Stream id layout: bits 0-7 slot, bits 8-47 segment index, bits 48-63
/// sweep point index. Segments never share streams, which keeps parallel
/// and serial execution bit-identical.
constexpr std::uint64_t make_stream_id(StreamSlot slot, std::uint64_t segment,
                                       std::uint64_t point = 0) noexcept {
  return (point << 48) | ((segment & ((std::uint64_t{1} << 40) - 1)) << 8) |
         static_cast<std::uint64_t>(slot);
}

}  // namespace g2sim
