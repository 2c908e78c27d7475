#include <doctest.h>

#include <cmath>
#include <random>

#include "g2sim/analysis.hpp"
#include "g2sim/errors.hpp"
#include "g2sim/qm_source.hpp"
#include "g2sim/run.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace g2sim;

namespace {

CoincidenceCounts from_totals(const CountSet& t, std::uint64_t bins = 1000) {
  CoincidenceCounts c;
  c.bin_width = 20.83e-9;
  c.total_bins = bins;
  c.totals = t;
  c.segments.push_back({bins, t, false});
  return c;
}

ExperimentConfig quiet_qm(double mu, std::uint32_t m, std::uint64_t bins) {
  ExperimentConfig cfg;
  cfg.source = {mu, m};
  cfg.optics = {1.0, 0.5, 0.5, 0.5, 0.5};
  for (auto& n : cfg.detectors.noise) n = {0.0, 0.0};
  cfg.n_bins = bins;
  cfg.segment_bins = 20000;
  cfg.seed = 1234;
  return cfg;
}

CoincidenceCounts counts_of(const ExperimentConfig& cfg) {
  return accumulate(simulate(cfg), cfg.segment_bins);
}

}  // namespace

TEST_CASE("heralded g2 on hand-made counts") {
  const auto e = heralded_g2(from_totals({100, 10, 10, 10, 10, 1, 1}));
  CHECK(e.value == doctest::Approx(1.0));
  CHECK(e.sigma == doctest::Approx(std::sqrt(1.0 + 0.1 + 0.1 + 0.01)));
  CHECK_FALSE(e.upper_limit);
}

TEST_CASE("zero triples give a flagged upper limit") {
  const auto e = heralded_g2(from_totals({100, 10, 10, 10, 10, 1, 0}));
  CHECK(e.value == 0.0);
  CHECK(e.upper_limit);
  // sigma of a single-triple estimate
  CHECK(e.sigma == doctest::Approx(std::sqrt(1.0 + 0.1 + 0.1 + 0.01)));
}

TEST_CASE("zero denominators are insufficient statistics") {
  CHECK_THROWS_AS(heralded_g2(from_totals({100, 10, 10, 0, 10, 0, 0})), StatisticsError);
  CHECK_THROWS_AS(heralded_g2(from_totals({100, 10, 10, 10, 0, 0, 0})), StatisticsError);
}

TEST_CASE("uncorrelated noise clicks give g2 = 1") {
  auto cfg = quiet_qm(0.0, 1, 1'000'000);
  for (auto& n : cfg.detectors.noise) n = {4e6, 4e6};
  const auto e = heralded_g2(counts_of(cfg));
  CHECK(std::abs(e.value - 1.0) < 3 * e.sigma);
}

TEST_CASE("simulated g2 matches the prediction") {
  const auto cfg = quiet_qm(0.05, 100, 4'000'000);
  const auto e = heralded_g2(counts_of(cfg));
  const double predicted = qm_g2_predicted(pair_prob(0.05, 100, 1), 0.5, g_factor(100));
  CHECK(std::abs(e.value - predicted) < 3 * e.sigma);
}

TEST_CASE("segmented g2 of one segment is the pooled estimate") {
  const auto c = from_totals({1000, 100, 90, 20, 25, 3, 2});
  const auto a = segmented_g2(c, 10);
  const auto b = heralded_g2(c);
  CHECK(a.value == b.value);
  CHECK(a.sigma == b.sigma);
}

TEST_CASE("segmented g2 agrees with the pooled value on stationary data") {
  const auto c = counts_of(quiet_qm(0.05, 1, 2'000'000));
  const auto pooled = heralded_g2(c);
  const auto seg = segmented_g2(c, 10);
  CHECK(std::abs(seg.value - pooled.value) < pooled.sigma);
  CHECK(seg.sigma == doctest::Approx(pooled.sigma).epsilon(0.1));
}

TEST_CASE("segmented g2 removes the bias of a rate drift") {
  // The second half runs with the signal arm at half transmission: each half
  // has the same g2, the pooled ratio does not.
  auto cfg = quiet_qm(0.05, 1, 2'000'000);
  const auto first = counts_of(cfg);
  cfg.optics.attenuation = 0.5;
  cfg.seed += 1;
  const auto drifted = merge(first, counts_of(cfg));
  const double truth = qm_g2_predicted(pair_prob(0.05, 1, 1), 0.5, g_factor(1));
  const auto pooled = heralded_g2(drifted);
  const auto seg = segmented_g2(drifted, 10);
  CHECK(std::abs(seg.value - truth) < std::abs(pooled.value - truth));
  CHECK(std::abs(seg.value - truth) < 2 * seg.sigma);
  CHECK(pooled.value / truth > 1.05);
}

TEST_CASE("Klyshko efficiency") {
  SUBCASE("lossless") {
    const auto k = klyshko_efficiency(from_totals({50, 50, 50, 50, 50, 50, 50}));
    CHECK(k.eta_1.value == 1.0);
    CHECK(k.eta_1.sigma == 0.0);
    CHECK(k.eta_herald.value == 1.0);
  }
  SUBCASE("path shares divide out") {
    const auto k = klyshko_efficiency(from_totals({1000, 300, 300, 100, 50, 0, 0}), {0.5, 0.25});
    CHECK(k.eta_1.value == doctest::Approx(0.2));
    CHECK(k.eta_2.value == doctest::Approx(0.2));
    CHECK(k.eta_1.sigma == doctest::Approx(std::sqrt(0.1 * 0.9 / 1000) / 0.5));
  }
  SUBCASE("variance above Poisson widens the interval") {
    auto c = from_totals({1000, 300, 300, 100, 50, 0, 0});
    const auto plain = klyshko_efficiency(c);
    c.variance = c.totals;
    c.variance->herald_one = 200;  // twice Poisson
    const auto wide = klyshko_efficiency(c);
    const double extra = 0.1 * 0.1 * (100.0 / (100.0 * 100.0));
    CHECK(wide.eta_1.sigma == doctest::Approx(std::sqrt(plain.eta_1.sigma * plain.eta_1.sigma + extra)));
    CHECK(wide.eta_2.sigma == plain.eta_2.sigma);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(klyshko_efficiency(from_totals({0, 1, 1, 0, 0, 0, 0})), StatisticsError);
    CHECK_THROWS_AS(klyshko_efficiency(from_totals({10, 1, 1, 1, 1, 0, 0}), {0.0, 1.0}),
                    DomainError);
  }
  SUBCASE("recovers configured efficiencies") {
    auto cfg = quiet_qm(0.01, 10, 10'000'000);
    cfg.optics = {1.0, 0.5, 0.26, 0.075, 0.055};
    const auto k = klyshko_efficiency(counts_of(cfg), {0.5, 0.5});
    CHECK(std::abs(k.eta_1.value - 0.075) < 2 * k.eta_1.sigma);
    CHECK(std::abs(k.eta_2.value - 0.055) < 2 * k.eta_2.sigma);
    CHECK(std::abs(k.eta_herald.value - 0.26) < 2 * k.eta_herald.sigma);
  }
}

TEST_CASE("background subtraction") {
  auto bg_cfg = quiet_qm(0.0, 1, 2'000'000);
  for (auto& n : bg_cfg.detectors.noise) n = {150.0, 2e5};
  bg_cfg.seed = 77;
  const auto background = counts_of(bg_cfg);

  SUBCASE("silent background is the identity") {
    auto silent = background;
    silent.totals = {};
    for (auto& s : silent.segments) s.counts = {};
    silent.variance.reset();
    const auto signal = counts_of(quiet_qm(0.02, 1, 1'000'000));
    const auto out = background_subtract(signal, silent);
    CHECK(out.totals == signal.totals);
    CHECK(out.clamped.empty());
  }

  // Single-run "within 2 sigma" statements hold 95% of the time, so these
  // two are checked as coverage over independent repetitions.
  SUBCASE("source-off runs subtract to zero") {
    int inside = 0;
    int total = 0;
    for (std::uint64_t rep = 0; rep < 20; ++rep) {
      auto other = bg_cfg;
      other.seed = 1000 + rep;
      const auto out = background_subtract(counts_of(other), background);
      const auto var = out.total_variance();
      inside += std::abs(out.totals.herald) < 2 * std::sqrt(var.herald);
      inside += std::abs(out.totals.one) < 2 * std::sqrt(var.one);
      inside += std::abs(out.totals.two) < 2 * std::sqrt(var.two);
      total += 3;
    }
    MESSAGE("singles within 2 sigma of zero: " << inside << " of " << total);
    CHECK(inside >= 52);
  }

  SUBCASE("self-subtraction leaves only noise") {
    const auto out = background_subtract(background, background);
    const auto var = out.total_variance();
    CHECK(out.totals.herald == 0.0);
    CHECK(out.totals.herald_one <= 2 * std::sqrt(var.herald_one));
    CHECK(out.totals.triple <= 2 * std::sqrt(var.triple) + 1e-12);
  }

  SUBCASE("paired simulations recover the clean g2") {
    int inside = 0;
    for (std::uint64_t rep = 0; rep < 20; ++rep) {
      auto clean = quiet_qm(0.05, 1, 2'000'000);
      clean.seed = 3000 + rep;
      auto noisy = clean;
      for (auto& n : noisy.detectors.noise) n = bg_cfg.detectors.noise[0];
      noisy.seed = 2000 + rep;
      auto bg = bg_cfg;
      bg.seed = 4000 + rep;
      const auto a = heralded_g2(counts_of(clean));
      const auto b = heralded_g2(background_subtract(counts_of(noisy), counts_of(bg)));
      inside += std::abs(a.value - b.value) < 2 * std::hypot(a.sigma, b.sigma);
    }
    MESSAGE("paired runs within 2 sigma: " << inside << " of 20");
    CHECK(inside >= 17);
  }

  SUBCASE("errors") {
    auto other = background;
    other.bin_width *= 2;
    CHECK_THROWS_AS(background_subtract(background, other), FormatError);
    CoincidenceCounts empty;
    empty.bin_width = background.bin_width;
    CHECK_THROWS_AS(background_subtract(background, empty), StatisticsError);
  }
}

TEST_CASE("fit of an exact line") {
  std::vector<FitPoint> pts;
  for (int i = 0; i < 6; ++i) {
    const double x = 0.1 * i + 0.05;
    pts.push_back({x, 2 * x + 0.001, 0.01 * (i + 1)});
  }
  const auto f = weighted_linear_fit(pts);
  CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(0.001).epsilon(1e-9));
  CHECK(f.reduced_chi2 == doctest::Approx(0.0).epsilon(1e-20));
  CHECK(f.dof == 4);
  CHECK(f.covariance[0][1] == f.covariance[1][0]);
  CHECK(f.covariance[0][0] > 0);
  CHECK(f.covariance[0][0] * f.covariance[1][1] >= f.covariance[0][1] * f.covariance[0][1]);
}

TEST_CASE("fit is affine-equivariant in x") {
  std::mt19937_64 gen(2);
  const auto pts = synthetic::sweep(2.4e-9, 0.00376, {}, gen);
  const auto f = weighted_linear_fit(pts);
  for (double c : {4.0, 3.0, 1e-3}) {
    auto scaled = pts;
    for (auto& p : scaled) p.x *= c;
    const auto g = weighted_linear_fit(scaled);
    CHECK(g.slope == doctest::Approx(f.slope / c).epsilon(1e-10));
    CHECK(g.intercept == doctest::Approx(f.intercept).epsilon(1e-10));
    CHECK(g.reduced_chi2 == doctest::Approx(f.reduced_chi2).epsilon(1e-10));
  }
}

TEST_CASE("fit input errors") {
  CHECK_THROWS_AS(weighted_linear_fit({{1, 1, 1}, {2, 2, 1}}), StatisticsError);
  CHECK_THROWS_AS(weighted_linear_fit({{1, 1, 1}, {2, 2, 0}, {3, 3, 1}}), StatisticsError);
  CHECK_THROWS_AS(weighted_linear_fit({{1, 1, 1}, {1, 2, 1}, {1, 3, 1}}), DomainError);
}

TEST_CASE("injected slope and offset are recovered") {
  std::mt19937_64 gen(20240611);
  const auto f = weighted_linear_fit(synthetic::sweep(2.4e-9, 0.00376, {}, gen));
  CHECK(synthetic::within(f.slope, 2.4e-9, f.slope_sigma(), 2));
  CHECK(synthetic::within(f.intercept, 0.00376, f.intercept_sigma(), 2));
  CHECK(f.slope_sigma() == doctest::Approx(1.5e-9).epsilon(0.2));
}

TEST_CASE("zero-slope coverage over repeated synthetic sweeps") {
  // 100 points per sweep: with only a handful of points the reduced chi2
  // window [0.5, 1.5] is too narrow to hold 95% of the time.
  synthetic::SweepShape shape;
  shape.points = 100;
  std::mt19937_64 gen(31);
  int good = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto f = weighted_linear_fit(synthetic::sweep(0.0, 0.00376, shape, gen));
    good += std::abs(f.slope) < 2 * f.slope_sigma() && f.reduced_chi2 >= 0.5 &&
            f.reduced_chi2 <= 1.5;
  }
  MESSAGE("sweeps inside both windows: " << good << " of 100");
  CHECK(good >= 95);
}

TEST_CASE("corrected rate") {
  SUBCASE("lossless identity") {
    OpticsConfig optics{1.0, 0.5, 1.0, 1.0, 1.0};
    const auto c = from_totals({500, 100, 100, 40, 60, 0, 0}, 1'000'000);
    const auto r = corrected_rate(c, optics, 2.0);
    CHECK(r.value == doctest::Approx(50.0));
    CHECK(r.sigma == doctest::Approx(std::sqrt(100.0) / 2.0));
  }
  SUBCASE("errors") {
    OpticsConfig optics;
    const auto c = from_totals({500, 100, 100, 40, 60, 0, 0});
    CHECK_THROWS_AS(corrected_rate(c, optics, 0.0), DomainError);
    optics.eta_1 = 0.0;
    CHECK_THROWS_AS(corrected_rate(c, optics, 1.0), DomainError);
  }
  SUBCASE("closure against the incident heralded rate") {
    const double mu = 0.001;
    auto cfg = quiet_qm(mu, 10, 20'000'000);
    const auto c = counts_of(cfg);
    const auto r = corrected_rate(c, cfg.optics, cfg.duration());
    // Rate of signal photons that accompany a herald click.
    const auto pmf = oracle::pair_pmf_by_convolution(mu, 10, 40);
    double per_bin = 0;
    for (std::size_t n = 1; n < pmf.size(); ++n) {
      per_bin += pmf[n] * n * (1 - std::pow(1 - cfg.optics.eta_herald, n));
    }
    const double truth = cfg.optics.attenuation * per_bin / cfg.detectors.bin_width;
    CHECK(std::abs(r.value - truth) < 2 * r.sigma);
  }
  SUBCASE("halving the attenuation halves the rate") {
    auto cfg = quiet_qm(0.01, 10, 10'000'000);
    const auto a = corrected_rate(counts_of(cfg), cfg.optics, cfg.duration());
    cfg.optics.attenuation = 0.5;
    cfg.seed += 5;
    const auto b = corrected_rate(counts_of(cfg), cfg.optics, cfg.duration());
    CHECK(std::abs(a.value - 2 * b.value) < 3 * std::hypot(a.sigma, 2 * b.sigma));
  }
}
