#include "g2sim/pcsft_model.hpp"

#include <cmath>
#include <numbers>

#include "g2sim/errors.hpp"
#include "g2sim/parallel.hpp"
#include "noise.hpp"

namespace g2sim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSplit = 0.64;             // series switch point of the exit-time density
constexpr double kTailStart = 1.25;         // 1 / sqrt(kSplit)
constexpr double kRightRate = kPi * kPi / 8.0;
// Distance to the barrier, in step standard deviations, below which the walk
// is stepped explicitly instead of jumped.
constexpr double kJumpThreshold = 4.0;

// n-th term of the exit-time density series; `left` selects the small-time form.
double series_term(std::uint32_t n, double x, bool left) {
  const double h = static_cast<double>(n) + 0.5;
  if (left) {
    return kPi * h * std::pow(2.0 / (kPi * x), 1.5) * std::exp(-2.0 * h * h / x);
  }
  return kPi * h * std::exp(-h * h * kPi * kPi * x / 2.0);
}

// Standard normal conditioned on Y > a (a >= 1), by Marsaglia's tail method.
double normal_tail(double a, RandomStream& rng) {
  for (;;) {
    const double x = -std::log(rng.uniform_pos()) / a;
    const double y = -std::log(rng.uniform_pos());
    if (2.0 * y > x * x) return a + x;
  }
}

std::uint64_t steps_within(double horizon, double dt) {
  return static_cast<std::uint64_t>(std::floor(horizon / dt * (1.0 + 1e-12)));
}

}  // namespace

double mean_first_passage(double threshold_energy, double power) {
  if (!(threshold_energy > 0.0)) throw DomainError("mean_first_passage: E_d must be > 0");
  if (!(power > 0.0)) throw DomainError("mean_first_passage: zero power gives an infinite mean");
  return threshold_energy / power;
}

double sample_unit_exit_time(RandomStream& rng) {
  // Proposal masses of the first series term on each side of the split.
  static const double left_mass = 2.0 * std::erfc(kTailStart / std::numbers::sqrt2);
  static const double right_mass = 4.0 / kPi * std::exp(-kRightRate * kSplit);
  static const double left_fraction = left_mass / (left_mass + right_mass);

  for (;;) {
    double x = 0.0;
    if (rng.uniform() < left_fraction) {
      const double y = normal_tail(kTailStart, rng);
      x = 1.0 / (y * y);
    } else {
      x = kSplit - std::log(rng.uniform_pos()) / kRightRate;
    }
    const bool left = x <= kSplit;
    double s = series_term(0, x, left);
    const double y = rng.uniform() * s;
    for (std::uint32_t n = 1;; ++n) {
      if (n % 2 == 1) {
        s -= series_term(n, x, left);
        if (y <= s) return x;
      } else {
        s += series_term(n, x, left);
        if (y > s) break;
      }
    }
  }
}

std::optional<std::uint64_t> first_crossing_step(double barrier, double step_sd,
                                                 std::uint64_t max_steps, RandomStream& rng) {
  if (step_sd <= 0.0 || max_steps == 0) return std::nullopt;
  const double jump_floor = kJumpThreshold * step_sd;
  double w = 0.0;
  std::uint64_t k = 0;
  while (k < max_steps) {
    const double room = barrier - std::abs(w);
    if (room > jump_floor) {
      // Exit time from (w - room, w + room), in units of monitoring steps.
      const double ratio = room / step_sd;
      const double exit_steps = ratio * ratio * sample_unit_exit_time(rng);
      if (exit_steps >= static_cast<double>(max_steps - k)) return std::nullopt;
      const double whole = std::floor(exit_steps);
      const double to_grid = whole + 1.0 - exit_steps;  // in (0, 1]
      k += static_cast<std::uint64_t>(whole) + 1;
      const double side = (rng.next_u32() & 1U) != 0 ? 1.0 : -1.0;
      w += side * room + step_sd * std::sqrt(to_grid) * rng.normal();
    } else {
      ++k;
      w += step_sd * rng.normal();
    }
    if (std::abs(w) >= barrier) return k;
  }
  return std::nullopt;
}

std::optional<std::uint64_t> first_crossing_step_stepwise(double barrier, double step_sd,
                                                          std::uint64_t max_steps,
                                                          RandomStream& rng) {
  if (step_sd <= 0.0) return std::nullopt;
  double w = 0.0;
  for (std::uint64_t k = 1; k <= max_steps; ++k) {
    w += step_sd * rng.normal();
    if (std::abs(w) >= barrier) return k;
  }
  return std::nullopt;
}

namespace {

template <typename Crossing>
PassageResult passage(double threshold_energy, double power, double dt, double t_max,
                      RandomStream& rng, Crossing crossing) {
  if (!(threshold_energy > 0.0)) throw DomainError("first passage: E_d must be > 0");
  if (!(power >= 0.0)) throw DomainError("first passage: power must be >= 0");
  if (!(dt > 0.0) || !(t_max >= dt)) throw DomainError("first passage: need 0 < dt <= t_max");
  if (power == 0.0) return {};
  const auto step = crossing(std::sqrt(threshold_energy), std::sqrt(power * dt),
                             steps_within(t_max, dt), rng);
  if (!step) return {};
  return {true, static_cast<double>(*step) * dt};
}

}  // namespace

PassageResult simulate_first_passage(double threshold_energy, double power, double dt,
                                     double t_max, RandomStream& rng) {
  return passage(threshold_energy, power, dt, t_max, rng, first_crossing_step);
}

PassageResult simulate_first_passage_stepwise(double threshold_energy, double power, double dt,
                                              double t_max, RandomStream& rng) {
  return passage(threshold_energy, power, dt, t_max, rng, first_crossing_step_stepwise);
}

double bound_energy(double pulse_duration, double bin_width, double pulse_energy,
                    double threshold_energy) {
  if (!(pulse_duration > 0.0 && bin_width > 0.0 && threshold_energy > 0.0)) {
    throw DomainError("bound_energy: durations and threshold must be > 0");
  }
  if (!(pulse_energy >= 0.0)) throw DomainError("bound_energy: pulse energy must be >= 0");
  return (2.0 * pulse_duration / bin_width) * (pulse_energy / threshold_energy);
}

double bound_counts(double pulse_duration, double bin_width, double n1, double n2,
                    double total_time) {
  if (!(total_time > 0.0)) throw DomainError("bound_counts: total time must be > 0");
  if (!(pulse_duration > 0.0 && bin_width > 0.0)) {
    throw DomainError("bound_counts: durations must be > 0");
  }
  if (!(n1 >= 0.0 && n2 >= 0.0)) throw DomainError("bound_counts: counts must be >= 0");
  return (2.0 * pulse_duration * pulse_duration / bin_width) * (n1 + n2) / total_time;
}

FieldPowers field_powers(const ExperimentConfig& cfg) {
  if (!cfg.pcsft) throw ConfigError("pcsft: section required");
  const auto& o = cfg.optics;
  const double sigma2 = cfg.pcsft->incident_power;
  const double w1 = o.splitter_ratio * o.eta_1;
  const double w2 = (1.0 - o.splitter_ratio) * o.eta_2;
  FieldPowers p;
  p.herald = sigma2 * o.eta_herald;
  p.signal = sigma2 * o.attenuation * (w1 + w2);
  p.route_to_one = (w1 + w2) > 0.0 ? w1 / (w1 + w2) : 0.0;
  return p;
}

std::uint64_t pulse_steps(const PcsftConfig& p) {
  return steps_within(p.pulse_duration, p.diffusion_step);
}

SegmentClicks simulate_pcsft_segment(const ExperimentConfig& cfg, std::uint64_t segment,
                                     std::uint64_t point) {
  SegmentClicks out;
  out.first_bin = segment * cfg.segment_bins;
  if (out.first_bin >= cfg.n_bins) return out;
  out.bins = std::min(cfg.segment_bins, cfg.n_bins - out.first_bin);

  const PcsftConfig& p = cfg.pcsft.value();
  const FieldPowers powers = field_powers(cfg);
  const double barrier = std::sqrt(p.threshold_energy);
  const std::uint64_t window = pulse_steps(p);
  const double herald_sd = std::sqrt(powers.herald * p.diffusion_step);
  const double signal_sd = std::sqrt(powers.signal * p.diffusion_step);
  const double shape = static_cast<double>(cfg.source.mode_count);

  RandomStream herald_rng(cfg.seed, make_stream_id(StreamSlot::field_herald, segment, point));
  RandomStream signal_rng(cfg.seed, make_stream_id(StreamSlot::field_signal, segment, point));
  RandomStream envelope_rng(cfg.seed,
                            make_stream_id(StreamSlot::field_envelope, segment, point));

  auto& herald = out.bins_clicked[index(Channel::herald)];
  auto& one = out.bins_clicked[index(Channel::one)];
  auto& two = out.bins_clicked[index(Channel::two)];

  for (std::uint64_t b = 0; b < out.bins; ++b) {
    const auto local = static_cast<std::uint32_t>(b);
    const double amplitude =
        p.thermal_envelope ? std::sqrt(envelope_rng.gamma(shape) / shape) : 1.0;

    if (first_crossing_step(barrier, herald_sd * amplitude, window, herald_rng)) {
      herald.push_back(local);
    }

    bool hit_one = false;
    bool hit_two = false;
    std::uint64_t remaining = window;
    while (remaining > 0 && !(hit_one && hit_two)) {
      const auto k = first_crossing_step(barrier, signal_sd * amplitude, remaining, signal_rng);
      if (!k) break;
      remaining -= *k;
      if (signal_rng.uniform() < powers.route_to_one) {
        hit_one = true;
      } else {
        hit_two = true;
      }
    }
    if (hit_one) one.push_back(local);
    if (hit_two) two.push_back(local);
  }

  detail::overlay_noise(cfg, segment, point, out);
  return out;
}

ClickStreams simulate_pcsft_run(const ExperimentConfig& cfg, unsigned threads) {
  const ExperimentConfig valid = validate_config(cfg);
  if (valid.theory != Theory::pcsft) {
    throw ConfigError("run.theory: simulate_pcsft_run expects pcsft");
  }
  const std::uint64_t n_segments = valid.segment_count();
  std::vector<SegmentClicks> segments(n_segments);
  parallel_for(n_segments, threads,
               [&](std::size_t s) { segments[s] = simulate_pcsft_segment(valid, s); });
  ClickStreams streams(valid.n_bins, valid.detectors.bin_width);
  for (const auto& seg : segments) write_segment(streams, seg);
  return streams;
}

}  // namespace g2sim
