#pragma once

// Threshold-detector model of the classical-field alternative.
//
// A detector holds a field amplitude W that starts at 0 and diffuses with
// variance `power` per unit time. It clicks at the first monitoring step
// (spacing dt) where the field energy W^2 reaches the threshold E_d, i.e.
// where W leaves the symmetric interval (-sqrt(E_d), +sqrt(E_d)). The
// continuous-time mean exit time is E_d / power.

#include <cstdint>
#include <optional>

#include "g2sim/click_streams.hpp"
#include "g2sim/config.hpp"
#include "g2sim/rng.hpp"

namespace g2sim {

struct PassageResult {
  bool hit = false;
  double hit_time = 0.0;  ///< seconds; meaningful only when hit
};

/// Mean threshold-crossing time E_d / power.
double mean_first_passage(double threshold_energy, double power);

/// Exit time of a standard Brownian motion from (-1, 1), started at 0.
/// Exact sampler (alternating-series rejection with split point 0.64).
double sample_unit_exit_time(RandomStream& rng);

/// First monitoring step k in [1, max_steps] at which a walk with Gaussian
/// increments N(0, step_sd^2), started at 0, satisfies |W| >= barrier.
///
/// Far from the barrier the walk is advanced by an exact jump: the exit time
/// of the underlying Brownian path from the largest interval centred on W
/// that stays inside the barrier. Grid points before that exit cannot have
/// crossed, so the result has the same law as stepping every increment.
std::optional<std::uint64_t> first_crossing_step(double barrier, double step_sd,
                                                 std::uint64_t max_steps, RandomStream& rng);

/// Reference version of first_crossing_step that draws every increment.
std::optional<std::uint64_t> first_crossing_step_stepwise(double barrier, double step_sd,
                                                          std::uint64_t max_steps,
                                                          RandomStream& rng);

/// Threshold crossing of a field of the given power within t_max, monitored
/// every dt. hit_time is a multiple of dt in (0, t_max].
PassageResult simulate_first_passage(double threshold_energy, double power, double dt,
                                     double t_max, RandomStream& rng);

/// Same law as simulate_first_passage, every increment drawn explicitly.
PassageResult simulate_first_passage_stepwise(double threshold_energy, double power, double dt,
                                              double t_max, RandomStream& rng);

/// g2 upper bound in terms of pulse energy: (2 delta / bin_width) (E_pulse / E_d).
double bound_energy(double pulse_duration, double bin_width, double pulse_energy,
                    double threshold_energy);

/// g2 upper bound in terms of counts: (2 delta^2 / bin_width) (N1 + N2) / T.
double bound_counts(double pulse_duration, double bin_width, double n1, double n2,
                    double total_time);

/// Field powers seen by the detectors in one bin (before any envelope factor).
struct FieldPowers {
  double herald = 0.0;        ///< incident_power * eta_h
  double signal = 0.0;        ///< incident_power * attenuation * (r eta_1 + (1-r) eta_2)
  double route_to_one = 0.0;  ///< probability that a signal-arm crossing registers on detector 1
};
FieldPowers field_powers(const ExperimentConfig& cfg);

/// Monitoring steps per pulse window.
std::uint64_t pulse_steps(const PcsftConfig& p);

/// One segment of a classical-field run.
///
/// Per bin: the herald detector runs its own threshold walk over the pulse
/// window. The signal arm carries a single field shared by the two detectors
/// behind the splitter: every threshold crossing deposits its energy in one
/// detector (detector 1 with probability route_to_one), the field restarts
/// at 0 and keeps diffusing for the rest of the window. Fields restart at the
/// start of every bin. With thermal_envelope set, all powers in a bin share a
/// Gamma(M, 1/M) multiplier. Dark/background clicks are OR-ed in as for QM.
SegmentClicks simulate_pcsft_segment(const ExperimentConfig& cfg, std::uint64_t segment,
                                     std::uint64_t point = 0);

/// Full classical-field run. Output is independent of `threads`.
ClickStreams simulate_pcsft_run(const ExperimentConfig& cfg, unsigned threads = 1);

}  // namespace g2sim
