#include "g2sim/config.hpp"

#include <cmath>
#include <sstream>

#include "g2sim/errors.hpp"

namespace g2sim {

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out = "invalid configuration:";
  for (const auto& p : parts) {
    out += "\n  ";
    out += p;
  }
  return out;
}

class Checker {
 public:
  void require(bool ok, std::string_view field, std::string_view what, double value) {
    if (ok) return;
    std::ostringstream os;
    os.precision(10);
    os << field << ": " << what << " (got " << value << ")";
    violations_.push_back(os.str());
  }
  void fail(std::string message) { violations_.push_back(std::move(message)); }

  void unit_interval(std::string_view field, double v) {
    require(std::isfinite(v) && v >= 0.0 && v <= 1.0, field, "must lie in [0, 1]", v);
  }
  void positive(std::string_view field, double v) {
    require(std::isfinite(v) && v > 0.0, field, "must be > 0", v);
  }
  void non_negative(std::string_view field, double v) {
    require(std::isfinite(v) && v >= 0.0, field, "must be >= 0", v);
  }

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

constexpr double kMaxNoiseProbability = 0.1;

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : Error(join(violations)), violations_(std::move(violations)) {}

std::string_view channel_name(Channel c) noexcept {
  switch (c) {
    case Channel::herald:
      return "h";
    case Channel::one:
      return "1";
    case Channel::two:
      return "2";
  }
  return "?";
}

std::string_view theory_name(Theory t) noexcept { return t == Theory::qm ? "qm" : "pcsft"; }

Theory parse_theory(std::string_view text) {
  if (text == "qm" || text == "QM") return Theory::qm;
  if (text == "pcsft" || text == "PCSFT") return Theory::pcsft;
  throw ConfigError("run.theory: expected 'qm' or 'pcsft' (got '" + std::string(text) + "')");
}

double OpticsConfig::eta(Channel c) const noexcept {
  switch (c) {
    case Channel::herald:
      return eta_herald;
    case Channel::one:
      return eta_1;
    case Channel::two:
      return eta_2;
  }
  return 0.0;
}

double DetectorConfig::noise_probability(Channel c) const noexcept {
  const auto& n = noise[index(c)];
  return (n.dark_rate + n.background_rate) * bin_width;
}

ExperimentConfig validate_config(const ExperimentConfig& cfg) {
  Checker check;

  check.non_negative("source.pair_mean_per_bin", cfg.source.pair_mean_per_bin);
  check.require(cfg.source.mode_count >= 1, "source.mode_count", "must be >= 1",
                cfg.source.mode_count);

  check.unit_interval("optics.attenuation", cfg.optics.attenuation);
  check.unit_interval("optics.splitter_ratio", cfg.optics.splitter_ratio);
  check.unit_interval("optics.eta_h", cfg.optics.eta_herald);
  check.unit_interval("optics.eta_1", cfg.optics.eta_1);
  check.unit_interval("optics.eta_2", cfg.optics.eta_2);

  const double dt = cfg.detectors.bin_width;
  check.positive("detectors.bin_width", dt);
  for (Channel c : kChannels) {
    const auto& n = cfg.detectors.noise[index(c)];
    const std::string suffix = "_" + std::string(channel_name(c));
    check.non_negative("detectors.dark_rate" + suffix, n.dark_rate);
    check.non_negative("detectors.background_rate" + suffix, n.background_rate);
    if (std::isfinite(dt) && dt > 0.0) {
      check.require(n.dark_rate * dt < kMaxNoiseProbability, "detectors.dark_rate" + suffix,
                    "dark_rate * bin_width must be < 0.1", n.dark_rate * dt);
      check.require(n.background_rate * dt < kMaxNoiseProbability,
                    "detectors.background_rate" + suffix,
                    "background_rate * bin_width must be < 0.1", n.background_rate * dt);
    }
  }

  check.require(cfg.n_bins >= 1, "run.n_bins", "must be >= 1", static_cast<double>(cfg.n_bins));
  check.require(cfg.segment_bins >= 1, "run.segment_bins", "must be >= 1",
                static_cast<double>(cfg.segment_bins));
  check.require(cfg.segment_bins <= cfg.n_bins, "run.segment_bins", "must not exceed run.n_bins",
                static_cast<double>(cfg.segment_bins));
  check.require(cfg.segment_bins <= std::uint64_t{1} << 32, "run.segment_bins",
                "must be <= 2^32", static_cast<double>(cfg.segment_bins));

  if (cfg.theory == Theory::pcsft && !cfg.pcsft) {
    check.fail("pcsft: theory = pcsft requires a [pcsft] section");
  }
  if (cfg.pcsft) {
    const auto& p = *cfg.pcsft;
    check.positive("pcsft.threshold_energy", p.threshold_energy);
    check.positive("pcsft.pulse_duration", p.pulse_duration);
    check.non_negative("pcsft.incident_power", p.incident_power);
    check.positive("pcsft.diffusion_step", p.diffusion_step);
    if (std::isfinite(dt) && dt > 0.0) {
      check.require(p.pulse_duration <= dt * (1.0 + 1e-12), "pcsft.pulse_duration",
                    "must not exceed detectors.bin_width", p.pulse_duration);
    }
    if (p.pulse_duration > 0.0) {
      check.require(p.diffusion_step <= p.pulse_duration * 1e-3 * (1.0 + 1e-12),
                    "pcsft.diffusion_step", "must be <= pulse_duration / 1000",
                    p.diffusion_step);
    }
  }

  if (!check.violations().empty()) throw ConfigError(check.violations());
  return cfg;
}

std::vector<std::string> config_warnings(const ExperimentConfig& cfg) {
  std::vector<std::string> out;
  if (cfg.source.pair_mean_per_bin > 0.2) {
    out.emplace_back("source.pair_mean_per_bin > 0.2: outside the heralded single-photon regime");
  }
  if (cfg.theory == Theory::qm && cfg.optics.eta_herald == 0.0) {
    out.emplace_back("optics.eta_h = 0: no heralds will be recorded");
  }
  return out;
}

}  // namespace g2sim
