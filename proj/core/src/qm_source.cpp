#include "g2sim/qm_source.hpp"

#include <algorithm>
#include <cmath>

#include "g2sim/errors.hpp"
#include "g2sim/parallel.hpp"
#include "noise.hpp"

namespace g2sim {

namespace {

constexpr std::uint64_t kRecurrenceLimit = 256;

}  // namespace

double g_factor(std::uint32_t mode_count) {
  if (mode_count < 1) throw DomainError("g_factor: mode count must be >= 1");
  return 1.0 + 1.0 / static_cast<double>(mode_count);
}

double pair_prob(double mean, std::uint32_t mode_count, std::uint64_t n) {
  if (mode_count < 1) throw DomainError("pair_prob: mode count must be >= 1");
  if (!(mean >= 0.0)) throw DomainError("pair_prob: mean must be >= 0");
  if (mean == 0.0) return n == 0 ? 1.0 : 0.0;

  const double m = static_cast<double>(mode_count);
  const double q = mean / (m + mean);
  const double log_vacuum = -m * std::log1p(mean / m);
  if (n <= kRecurrenceLimit) {
    double p = std::exp(log_vacuum);
    for (std::uint64_t k = 1; k <= n; ++k) {
      p *= q * (static_cast<double>(k - 1) + m) / static_cast<double>(k);
    }
    return p;
  }
  const double nn = static_cast<double>(n);
  return std::exp(std::lgamma(nn + m) - std::lgamma(nn + 1.0) - std::lgamma(m) +
                  nn * std::log(q) + log_vacuum);
}

PairCountSampler::PairCountSampler(double mean, std::uint32_t mode_count)
    : mean_(mean), modes_(mode_count) {
  if (mode_count < 1) throw DomainError("PairCountSampler: mode count must be >= 1");
  if (!(mean >= 0.0)) throw DomainError("PairCountSampler: mean must be >= 0");
  const double m = static_cast<double>(mode_count);
  ratio_ = mean / (m + mean);
  const double log_vacuum = -m * std::log1p(mean / m);
  vacuum_ = std::exp(log_vacuum);
  nonzero_ = -std::expm1(log_vacuum);

  pmf_.push_back(vacuum_);
  if (mean == 0.0) return;
  double tail = nonzero_;
  double p = vacuum_;
  for (std::uint64_t k = 1; k < 64 && tail > 1e-18 * nonzero_; ++k) {
    p *= ratio_ * (static_cast<double>(k - 1) + m) / static_cast<double>(k);
    pmf_.push_back(p);
    tail -= p;
  }
}

std::uint64_t PairCountSampler::invert(double target, bool conditional) const {
  std::uint64_t n = conditional ? 1 : 0;
  double p = pmf_[n];
  double cum = p;
  const double m = static_cast<double>(modes_);
  while (cum <= target) {
    ++n;
    if (n < pmf_.size()) {
      p = pmf_[n];
    } else {
      p *= ratio_ * (static_cast<double>(n - 1) + m) / static_cast<double>(n);
      if (p == 0.0) return n;  // target lies in the rounding residue of the tail
    }
    cum += p;
  }
  return n;
}

std::uint64_t PairCountSampler::operator()(RandomStream& rng) const {
  if (mean_ == 0.0) return 0;
  return invert(rng.uniform(), false);
}

std::uint64_t PairCountSampler::sample_nonzero(RandomStream& rng) const {
  if (mean_ == 0.0) throw DomainError("sample_nonzero: distribution has no mass at n >= 1");
  return invert(rng.uniform() * nonzero_, true);
}

std::uint64_t sample_pair_count(double mean, std::uint32_t mode_count, RandomStream& rng) {
  return PairCountSampler(mean, mode_count)(rng);
}

double qm_g2_predicted(double single_pair_prob, double eta_herald, double g) {
  if (!(eta_herald > 0.0 && eta_herald <= 1.0)) {
    throw DomainError("qm_g2_predicted: herald efficiency must lie in (0, 1]");
  }
  if (!(single_pair_prob >= 0.0)) throw DomainError("qm_g2_predicted: P(1) must be >= 0");
  const double p2 = 0.5 * g * single_pair_prob * single_pair_prob;
  if (single_pair_prob == 0.0) return 0.0;
  const double herald_gain = (1.0 - (1.0 - eta_herald) * (1.0 - eta_herald)) / eta_herald;
  return 2.0 * (p2 / single_pair_prob) * herald_gain;
}

QmBand qm_band(double single_pair_prob, double eta_herald) {
  return {qm_g2_predicted(single_pair_prob, eta_herald, 1.0),
          qm_g2_predicted(single_pair_prob, eta_herald, 2.0)};
}

SegmentClicks simulate_qm_segment(const ExperimentConfig& cfg, std::uint64_t segment,
                                  std::uint64_t point) {
  SegmentClicks out;
  out.first_bin = segment * cfg.segment_bins;
  if (out.first_bin >= cfg.n_bins) return out;
  out.bins = std::min(cfg.segment_bins, cfg.n_bins - out.first_bin);
  const std::uint64_t bins = out.bins;

  std::array<std::vector<std::uint32_t>, kChannelCount> source;
  if (cfg.source.pair_mean_per_bin > 0.0) {
    RandomStream rng(cfg.seed, make_stream_id(StreamSlot::source, segment, point));
    const PairCountSampler sampler(cfg.source.pair_mean_per_bin, cfg.source.mode_count);
    const auto& o = cfg.optics;
    const double to_one = o.attenuation * o.splitter_ratio * o.eta_1;
    const double to_two = o.attenuation * (1.0 - o.splitter_ratio) * o.eta_2;

    std::uint64_t bin = 0;
    while (bin < bins) {
      const std::uint64_t skip = rng.geometric_failures(sampler.nonzero_probability());
      if (skip >= bins - bin) break;
      bin += skip;
      const std::uint64_t pairs = sampler.sample_nonzero(rng);
      bool herald = false;
      bool one = false;
      bool two = false;
      // Each photon: herald-arm survival, then signal-arm fate (detector 1,
      // detector 2 or lost). Two photons may share a detector and give one click.
      for (std::uint64_t k = 0; k < pairs; ++k) {
        herald |= rng.uniform() < o.eta_herald;
        const double u = rng.uniform();
        if (u < to_one) {
          one = true;
        } else if (u < to_one + to_two) {
          two = true;
        }
      }
      const auto local = static_cast<std::uint32_t>(bin);
      if (herald) source[index(Channel::herald)].push_back(local);
      if (one) source[index(Channel::one)].push_back(local);
      if (two) source[index(Channel::two)].push_back(local);
      ++bin;
    }
  }

  out.bins_clicked = std::move(source);
  detail::overlay_noise(cfg, segment, point, out);
  return out;
}

ClickStreams simulate_run(const ExperimentConfig& cfg, unsigned threads) {
  const ExperimentConfig valid = validate_config(cfg);
  if (valid.theory != Theory::qm) throw ConfigError("run.theory: simulate_run expects qm");
  const std::uint64_t n_segments = valid.segment_count();
  std::vector<SegmentClicks> segments(n_segments);
  parallel_for(n_segments, threads,
               [&](std::size_t s) { segments[s] = simulate_qm_segment(valid, s); });
  ClickStreams streams(valid.n_bins, valid.detectors.bin_width);
  for (const auto& seg : segments) write_segment(streams, seg);
  return streams;
}

}  // namespace g2sim
