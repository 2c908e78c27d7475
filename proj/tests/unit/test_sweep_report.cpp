#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "g2sim/errors.hpp"
#include "g2sim/report.hpp"
#include "g2sim/run.hpp"
#include "g2sim/sweep.hpp"

using namespace g2sim;

namespace {

ExperimentConfig base_qm() {
  ExperimentConfig cfg;
  cfg.source = {0.05, 1};
  cfg.optics = {1.0, 0.5, 0.5, 0.5, 0.5};
  cfg.n_bins = 400000;
  cfg.segment_bins = 20000;
  cfg.seed = 5;
  return cfg;
}

SweepPlan parse(const std::string& text) {
  std::istringstream in(text);
  return parse_plan(in);
}

}  // namespace

TEST_CASE("plan parsing") {
  const auto plan = parse(
      "[sweep]\nattenuations = 1.0, 0.5,0.25\ntarget_triples = 1e3\nmax_bins = 1e8\n"
      "background_bins = 5000\ntheory = pcsft\n");
  CHECK(plan.attenuations == std::vector<double>{1.0, 0.5, 0.25});
  CHECK(plan.target_triples == 1000);
  CHECK(plan.max_bins == 100000000);
  CHECK(plan.background_bins == 5000);
  CHECK(plan.theory == Theory::pcsft);
  CHECK(parse(plan_to_ini(plan)).attenuations == plan.attenuations);
  CHECK(plan_warnings(plan).empty());
}

TEST_CASE("plan defaults and validation") {
  const auto plan = parse("[sweep]\nattenuations = 0.5\n");
  CHECK(plan.target_triples == kDefaultTargetTriples);
  CHECK_FALSE(plan.theory);
  CHECK_THROWS_AS(parse("[sweep]\nattenuations = \n"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[sweep]\nattenuations = 1.0, 1.5\n"),
                       doctest::Contains("attenuations"), ConfigError);
  CHECK_THROWS_AS(parse("[sweep]\nattenuations = 1.0\ntarget_triples = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse("[sweep]\nattenuations = 1.0\nspeed = 3\n"), ConfigError);
  CHECK_FALSE(plan_warnings(parse("[sweep]\nattenuations = 0.5, 1.0\n")).empty());
}

TEST_CASE("point and background configs") {
  SweepPlan plan;
  plan.attenuations = {1.0, 0.5};
  plan.max_bins = 30000;
  plan.background_bins = 7000;
  const auto p = point_config(base_qm(), plan, 0.5);
  CHECK(p.optics.attenuation == 0.5);
  CHECK(p.n_bins == 30000);
  CHECK(p.segment_bins == 20000);
  const auto b = background_config(base_qm(), plan);
  CHECK(b.source.pair_mean_per_bin == 0.0);
  CHECK(b.n_bins == 7000);
}

TEST_CASE("sweep stops at the triple target and ignores thread count") {
  SweepPlan plan;
  plan.attenuations = {1.0, 0.6, 0.3};
  plan.target_triples = 50;
  plan.max_bins = 4'000'000;
  plan.background_bins = 100000;
  const auto a = run_sweep(base_qm(), plan, 1);
  const auto b = run_sweep(base_qm(), plan, 3);
  REQUIRE(a.points.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.points[i].counts == b.points[i].counts);
    CHECK(a.points[i].reached_target);
    CHECK(a.points[i].counts.totals.triple >= 50);
    // The run ends at the first segment reaching the target.
    const auto& segs = a.points[i].counts.segments;
    CHECK(a.points[i].counts.totals.triple - segs.back().counts.triple < 50);
  }
  CHECK(a.background == b.background);
  REQUIRE(a.background);
  CHECK(a.background->totals.herald_one < 5);
}

TEST_CASE("single-point plan: estimates but no fit") {
  SweepPlan plan;
  plan.attenuations = {1.0};
  plan.target_triples = 30;
  const auto report = build_report(run_sweep(base_qm(), plan));
  REQUIRE(report.points.size() == 1);
  CHECK(report.points[0].raw);
  CHECK_FALSE(report.fit);
  CHECK(report.fit_note.find("insufficient points") != std::string::npos);
}

TEST_CASE("report contents") {
  SweepPlan plan;
  plan.attenuations = {1.0, 0.7, 0.4};
  plan.target_triples = 100;
  plan.background_bins = 200000;
  auto base = base_qm();
  for (auto& n : base.detectors.noise) n = {150.0, 1e4};
  const auto sweep = run_sweep(base, plan);
  const auto report = build_report(sweep);
  CHECK(report.theory == "qm");
  CHECK(report.background_subtracted);
  CHECK(report.fit_series == "background_subtracted");
  REQUIRE(report.fit);
  CHECK(report.fit->dof == 1);
  CHECK_FALSE(has_failures(report));
  REQUIRE(report.band.size() == 6);
  for (std::size_t i = 1; i < report.band.size(); ++i) {
    CHECK(report.band[i - 1].x < report.band[i].x);
  }
  for (const auto& b : report.band) CHECK(b.lower <= b.upper);
  for (const auto& p : report.points) {
    REQUIRE(p.raw);
    REQUIRE(p.corrected);
    CHECK(p.label.rfind("alpha=", 0) == 0);
    CHECK(p.bound_counts);
    CHECK_FALSE(p.bound_energy);
    CHECK(p.raw->x_rate > 0);
  }
  // Rate axis follows the attenuation.
  CHECK(report.points[0].raw->x_rate > report.points[2].raw->x_rate);
}

TEST_CASE("self-subtraction raises flags, raw estimate stays") {
  const auto counts = accumulate(simulate(base_qm()), 20000);
  const auto report = build_report({{"run", std::nullopt, counts, std::nullopt, std::nullopt}},
                                   counts, base_qm());
  const auto& p = report.points.at(0);
  CHECK_FALSE(p.error);
  CHECK(p.raw);
  CHECK_FALSE(p.corrected);
  CHECK(std::find(p.flags.begin(), p.flags.end(), "bgsub_no_signal") != p.flags.end());
}

TEST_CASE("report JSON round trip") {
  SweepPlan plan;
  plan.attenuations = {1.0, 0.7, 0.4};
  plan.target_triples = 60;
  auto sweep = run_sweep(base_qm(), plan);
  sweep.points[1].error = "simulated failure";
  const auto report = build_report(sweep);
  CHECK(has_failures(report));
  std::stringstream buf;
  write_report_json(buf, report);
  const auto back = read_report_json(buf);
  std::stringstream again;
  write_report_json(again, back);
  CHECK(again.str() == buf.str());
  CHECK(back.points[1].error == "simulated failure");
  CHECK(back.fit_note.find("insufficient points") != std::string::npos);
}

TEST_CASE("report JSON rejects other versions") {
  std::istringstream in(R"({"report_version": 2})");
  CHECK_THROWS_AS(read_report_json(in), FormatError);
  std::istringstream junk("not json");
  CHECK_THROWS_AS(read_report_json(junk), FormatError);
}

TEST_CASE("report CSV has one row per point") {
  SweepPlan plan;
  plan.attenuations = {1.0, 0.5};
  plan.target_triples = 40;
  const auto report = build_report(run_sweep(base_qm(), plan));
  std::ostringstream out;
  write_report_csv(out, report);
  const std::string text = out.str();
  CHECK(text.rfind("label,attenuation,x_rate,x_sigma,g2,g2_sigma,upper_limit,", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

TEST_CASE("classical sweep respects the count bound") {
  ExperimentConfig cfg = base_qm();
  cfg.theory = Theory::pcsft;
  cfg.pcsft = PcsftConfig{};
  cfg.pcsft->incident_power = 7.3e7;
  cfg.segment_bins = 10000;
  SweepPlan plan;
  plan.attenuations = {1.0, 0.6};
  plan.target_triples = 200;
  plan.max_bins = 200000;
  const auto report = build_report(run_sweep(cfg, plan));
  for (const auto& p : report.points) {
    REQUIRE(p.raw);
    REQUIRE(p.bound_counts);
    REQUIRE(p.bound_energy);
    CHECK(p.raw->value <= *p.bound_counts);
  }
  CHECK(report.points[0].raw->value > report.points[1].raw->value);
}
