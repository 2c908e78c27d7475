#include "g2sim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "g2sim/errors.hpp"

namespace g2sim {

namespace {

double relative_variance(double count, double variance) {
  return count > 0.0 ? variance / (count * count) : 0.0;
}

G2Estimate estimate_from(const CountSet& c, const CountSet& var, std::uint64_t bins,
                         double bin_width) {
  if (!(c.herald_one > 0.0) || !(c.herald_two > 0.0)) {
    throw StatisticsError("heralded g2: need N_H1 > 0 and N_H2 > 0 (have " +
                          std::to_string(c.herald_one) + ", " + std::to_string(c.herald_two) +
                          ")");
  }
  G2Estimate e;
  e.counts = c;
  e.variance = var;
  e.bins = bins;
  e.bin_width = bin_width;
  const double scale = c.herald / (c.herald_one * c.herald_two);
  const double rel_rest = relative_variance(c.herald_one, var.herald_one) +
                          relative_variance(c.herald_two, var.herald_two) +
                          relative_variance(c.herald, var.herald);
  if (c.triple > 0.0) {
    e.value = scale * c.triple;
    e.sigma = e.value * std::sqrt(relative_variance(c.triple, var.triple) + rel_rest);
  } else {
    e.upper_limit = true;
    e.value = 0.0;
    e.sigma = scale * std::sqrt(1.0 + rel_rest);
  }
  return e;
}

}  // namespace

G2Estimate heralded_g2(const CoincidenceCounts& counts) {
  return estimate_from(counts.totals, counts.total_variance(), counts.total_bins,
                       counts.bin_width);
}

G2Estimate segmented_g2(const CoincidenceCounts& counts, std::size_t block_segments) {
  if (block_segments == 0) throw DomainError("segmented_g2: block size must be >= 1");
  const G2Estimate pooled = heralded_g2(counts);
  if (counts.segments.size() <= block_segments || pooled.upper_limit) return pooled;

  const double g_ref = pooled.value;
  double weight_sum = 0.0;
  double weighted_values = 0.0;
  for (std::size_t first = 0; first < counts.segments.size(); first += block_segments) {
    const std::size_t last = std::min(counts.segments.size(), first + block_segments);
    CountSet c;
    for (std::size_t s = first; s < last; ++s) c += counts.segments[s].counts;
    if (!(c.herald_one > 0.0) || !(c.herald_two > 0.0) || !(c.herald > 0.0)) continue;
    const double expected_triples = g_ref * c.herald_one * c.herald_two / c.herald;
    const double rel_var =
        1.0 / expected_triples + 1.0 / c.herald_one + 1.0 / c.herald_two + 1.0 / c.herald;
    const double weight = 1.0 / (g_ref * g_ref * rel_var);
    weight_sum += weight;
    weighted_values += weight * c.herald * c.triple / (c.herald_one * c.herald_two);
  }
  if (!(weight_sum > 0.0)) {
    throw StatisticsError("segmented g2: no block has N_H1 > 0 and N_H2 > 0");
  }

  G2Estimate e = pooled;
  e.value = weighted_values / weight_sum;
  e.sigma = 1.0 / std::sqrt(weight_sum);
  return e;
}

KlyshkoResult klyshko_efficiency(const CoincidenceCounts& counts,
                                 std::array<double, 2> path_share) {
  const CountSet& c = counts.totals;
  if (!(c.herald > 0.0)) throw StatisticsError("klyshko: N_H must be > 0");
  for (double s : path_share) {
    if (!(s > 0.0 && s <= 1.0)) throw DomainError("klyshko: path shares must lie in (0, 1]");
  }
  // Background subtraction leaves a variance above the Poisson level; that
  // excess is independent of the binomial split and adds in relative terms.
  const CountSet var = counts.total_variance();
  auto excess = [](double v, double n) { return n > 0.0 ? std::max(0.0, v - n) / (n * n) : 0.0; };
  auto ratio = [&](double hits, double hits_var, double trials, double trials_var,
                   double share) {
    const double p = std::clamp(hits / trials, 0.0, 1.0);
    const double value = hits / trials / share;
    const double binomial = p * (1.0 - p) / trials / (share * share);
    const double extra = value * value * (excess(hits_var, hits) + excess(trials_var, trials));
    return EfficiencyEstimate{value, std::sqrt(binomial + extra)};
  };
  KlyshkoResult r;
  r.eta_1 = ratio(c.herald_one, var.herald_one, c.herald, var.herald, path_share[0]);
  r.eta_2 = ratio(c.herald_two, var.herald_two, c.herald, var.herald, path_share[1]);
  const double signal = c.one + c.two;
  if (signal > 0.0) {
    r.eta_herald = ratio(c.herald_one + c.herald_two, var.herald_one + var.herald_two, signal,
                         var.one + var.two, 1.0);
  }
  return r;
}

namespace {

struct Subtraction {
  CountSet value;
  CountSet variance;
};

// Corrects one block of counts spanning `bins` bins. `rate` holds background
// per-bin probabilities, `bg` the raw background totals over `bg_bins`.
Subtraction subtract_block(const CountSet& n, const CountSet& n_var, std::uint64_t bins,
                           const CountSet& bg, const CountSet& bg_var, std::uint64_t bg_bins) {
  const double s = static_cast<double>(bins) / static_cast<double>(bg_bins);
  const double b = 1.0 / static_cast<double>(bg_bins);
  const double bh = bg.herald * b;
  const double b1 = bg.one * b;
  const double b2 = bg.two * b;

  Subtraction out;
  CountSet& v = out.value;
  v.herald = n.herald - s * bg.herald;
  v.one = n.one - s * bg.one;
  v.two = n.two - s * bg.two;
  v.herald_one = n.herald_one - s * bg.herald_one - (v.herald * b1 + v.one * bh);
  v.herald_two = n.herald_two - s * bg.herald_two - (v.herald * b2 + v.two * bh);
  v.one_two = n.one_two - s * bg.one_two - (v.one * b2 + v.two * b1);
  v.triple = n.triple - s * bg.triple -
             (v.herald_one * b2 + v.herald_two * b1 + v.one_two * bh);

  const double s2 = s * s;
  CountSet& var = out.variance;
  var.herald = n_var.herald + s2 * bg_var.herald;
  var.one = n_var.one + s2 * bg_var.one;
  var.two = n_var.two + s2 * bg_var.two;
  var.herald_one = n_var.herald_one + s2 * bg_var.herald_one;
  var.herald_two = n_var.herald_two + s2 * bg_var.herald_two;
  var.one_two = n_var.one_two + s2 * bg_var.one_two;
  var.triple = n_var.triple + s2 * bg_var.triple;
  return out;
}

void clamp_negative(CountSet& c, std::vector<std::string>* flags) {
  static constexpr std::array<const char*, 7> names{"N_H",  "N_1",  "N_2",  "N_H1",
                                                    "N_H2", "N_12", "N_H12"};
  std::array<double*, 7> f{&c.herald,     &c.one,     &c.two,   &c.herald_one,
                           &c.herald_two, &c.one_two, &c.triple};
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (*f[i] < 0.0) {
      *f[i] = 0.0;
      if (flags && std::find(flags->begin(), flags->end(), names[i]) == flags->end()) {
        flags->push_back(names[i]);
      }
    }
  }
}

}  // namespace

CoincidenceCounts background_subtract(const CoincidenceCounts& signal,
                                      const CoincidenceCounts& background) {
  if (signal.bin_width != background.bin_width) {
    throw FormatError("background_subtract: bin width mismatch");
  }
  if (background.total_bins == 0) {
    throw StatisticsError("background_subtract: background run has no bins");
  }
  const CountSet& bg = background.totals;
  const CountSet bg_var = background.total_variance();

  CoincidenceCounts out;
  out.bin_width = signal.bin_width;
  out.total_bins = signal.total_bins;
  out.clamped = signal.clamped;
  out.segments.reserve(signal.segments.size());
  for (const auto& seg : signal.segments) {
    // Segment variances are Poisson; only totals carry a stored variance.
    auto corrected =
        subtract_block(seg.counts, seg.counts, seg.bins, bg, bg_var, background.total_bins);
    clamp_negative(corrected.value, nullptr);
    out.segments.push_back({seg.bins, corrected.value, seg.partial});
  }
  auto totals = subtract_block(signal.totals, signal.total_variance(), signal.total_bins, bg,
                               bg_var, background.total_bins);
  clamp_negative(totals.value, &out.clamped);
  out.totals = totals.value;
  out.variance = totals.variance;
  return out;
}

double FitResult::slope_sigma() const { return std::sqrt(covariance[0][0]); }
double FitResult::intercept_sigma() const { return std::sqrt(covariance[1][1]); }

FitResult weighted_linear_fit(const std::vector<FitPoint>& points) {
  if (points.size() < 3) {
    throw StatisticsError("weighted fit: insufficient points (" + std::to_string(points.size()) +
                          ", need at least 3)");
  }
  double sw = 0.0;
  double swx = 0.0;
  double swy = 0.0;
  for (const auto& p : points) {
    if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) {
      throw StatisticsError("weighted fit: every sigma must be positive and finite");
    }
    const double w = 1.0 / (p.sigma * p.sigma);
    sw += w;
    swx += w * p.x;
    swy += w * p.y;
  }
  const double x_mean = swx / sw;
  const double y_mean = swy / sw;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& p : points) {
    const double w = 1.0 / (p.sigma * p.sigma);
    const double dx = p.x - x_mean;
    sxx += w * dx * dx;
    sxy += w * dx * (p.y - y_mean);
  }
  double x_scale = 0.0;
  for (const auto& p : points) x_scale = std::max(x_scale, std::abs(p.x));
  if (!(sxx > 1e-24 * sw * x_scale * x_scale) || x_scale == 0.0) {
    throw DomainError("weighted fit: x values are degenerate (rank-deficient design)");
  }

  FitResult r;
  r.slope = sxy / sxx;
  r.intercept = y_mean - r.slope * x_mean;
  r.covariance[0][0] = 1.0 / sxx;
  r.covariance[0][1] = r.covariance[1][0] = -x_mean / sxx;
  r.covariance[1][1] = 1.0 / sw + x_mean * x_mean / sxx;
  for (const auto& p : points) {
    const double resid = (p.y - (r.slope * p.x + r.intercept)) / p.sigma;
    r.chi2 += resid * resid;
  }
  r.dof = static_cast<int>(points.size()) - 2;
  r.reduced_chi2 = r.chi2 / r.dof;
  return r;
}

namespace {

RateEstimate rate_from(const CountSet& c, const CountSet& var, const OpticsConfig& optics,
                       double total_time) {
  if (!(total_time > 0.0)) throw DomainError("corrected_rate: total time must be > 0");
  if (!(optics.eta_1 > 0.0) || !(optics.eta_2 > 0.0)) {
    throw DomainError("corrected_rate: detector efficiencies must be > 0");
  }
  const double e1 = optics.eta_1;
  const double e2 = optics.eta_2;
  RateEstimate r;
  r.value = (c.herald_one / e1 + c.herald_two / e2) / total_time;
  r.sigma = std::sqrt(var.herald_one / (e1 * e1) + var.herald_two / (e2 * e2)) / total_time;
  return r;
}

}  // namespace

RateEstimate corrected_rate(const CoincidenceCounts& counts, const OpticsConfig& optics,
                            double total_time) {
  return rate_from(counts.totals, counts.total_variance(), optics, total_time);
}

void attach_rate(G2Estimate& estimate, const OpticsConfig& optics) {
  const auto r = rate_from(estimate.counts, estimate.variance, optics,
                           static_cast<double>(estimate.bins) * estimate.bin_width);
  estimate.x_rate = r.value;
  estimate.x_sigma = r.sigma;
}

}  // namespace g2sim
