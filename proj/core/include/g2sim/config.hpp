#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace g2sim {

/// Detector channels in the order they are stored everywhere.
enum class Channel : std::size_t { herald = 0, one = 1, two = 2 };
inline constexpr std::size_t kChannelCount = 3;
inline constexpr std::array<Channel, kChannelCount> kChannels{Channel::herald, Channel::one,
                                                              Channel::two};

constexpr std::size_t index(Channel c) noexcept { return static_cast<std::size_t>(c); }
std::string_view channel_name(Channel c) noexcept;

enum class Theory { qm, pcsft };
std::string_view theory_name(Theory t) noexcept;
Theory parse_theory(std::string_view text);

inline constexpr double kDefaultBinWidth = 20.83e-9;  // s
inline constexpr double kDefaultDarkRate = 150.0;     // 1/s
inline constexpr std::uint64_t kDefaultSegmentBins = 48000;  // ~1 ms at the default bin width

struct SourceConfig {
  double pair_mean_per_bin = 0.01;  ///< mean pair number per bin
  std::uint32_t mode_count = 1;     ///< thermal modes; G = 1 + 1/M
};

struct OpticsConfig {
  double attenuation = 1.0;      ///< signal-arm variable attenuator transmittance
  double splitter_ratio = 0.5;   ///< transmittance toward detector 1
  double eta_herald = 0.26;
  double eta_1 = 0.075;
  double eta_2 = 0.055;

  double eta(Channel c) const noexcept;
};

struct ChannelNoise {
  double dark_rate = kDefaultDarkRate;  ///< 1/s
  double background_rate = 0.0;         ///< 1/s
};

struct DetectorConfig {
  std::array<ChannelNoise, kChannelCount> noise{};
  double bin_width = kDefaultBinWidth;  ///< s

  /// Per-bin probability of a noise click. Rates combine linearly (p = rate * dt).
  double noise_probability(Channel c) const noexcept;
};

struct PcsftConfig {
  double threshold_energy = 1.0;    ///< E_d
  double pulse_duration = kDefaultBinWidth;  ///< s
  double incident_power = 0.0;      ///< energy/s reaching the detector tree at unit attenuation
  double diffusion_step = kDefaultBinWidth / 1000.0;  ///< s
  bool thermal_envelope = false;    ///< common Gamma(M, 1/M) power multiplier per bin
};

struct ExperimentConfig {
  SourceConfig source;
  OpticsConfig optics;
  DetectorConfig detectors;
  std::optional<PcsftConfig> pcsft;
  Theory theory = Theory::qm;
  std::uint64_t n_bins = 100 * kDefaultSegmentBins;
  std::uint64_t segment_bins = kDefaultSegmentBins;
  std::uint64_t seed = 0;

  std::uint64_t segment_count() const noexcept {
    return segment_bins == 0 ? 0 : (n_bins + segment_bins - 1) / segment_bins;
  }
  double duration() const noexcept { return static_cast<double>(n_bins) * detectors.bin_width; }
};

/// Returns `cfg` unchanged when every invariant holds, otherwise throws
/// ConfigError listing each violation by field name.
ExperimentConfig validate_config(const ExperimentConfig& cfg);

/// Non-fatal advisories (e.g. a pair mean outside the heralded regime).
std::vector<std::string> config_warnings(const ExperimentConfig& cfg);

}  // namespace g2sim
