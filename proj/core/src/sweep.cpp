#include "g2sim/sweep.hpp"

#include <boost/algorithm/string.hpp>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "g2sim/config_io.hpp"
#include "g2sim/errors.hpp"
#include "g2sim/run.hpp"

namespace g2sim {

void validate_plan(const SweepPlan& plan) {
  std::vector<std::string> problems;
  if (plan.attenuations.empty()) problems.emplace_back("sweep.attenuations: list is empty");
  for (std::size_t i = 0; i < plan.attenuations.size(); ++i) {
    const double a = plan.attenuations[i];
    if (!(a > 0.0 && a <= 1.0)) {
      std::ostringstream msg;
      msg << "sweep.attenuations[" << i << "]: " << a << " is outside (0, 1]";
      problems.push_back(msg.str());
    }
  }
  if (plan.target_triples < 1) problems.emplace_back("sweep.target_triples: must be >= 1");
  if (!problems.empty()) throw ConfigError(problems);
}

std::vector<std::string> plan_warnings(const SweepPlan& plan) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i < plan.attenuations.size(); ++i) {
    if (!(plan.attenuations[i] < plan.attenuations[i - 1])) {
      out.emplace_back("sweep.attenuations: not strictly decreasing");
      break;
    }
  }
  return out;
}

SweepPlan parse_plan(std::istream& in, const std::string& origin) {
  IniDocument doc = IniDocument::parse(in, origin);
  SweepPlan plan;
  if (auto raw = doc.take("sweep", "attenuations")) {
    std::vector<std::string> items;
    boost::split(items, *raw, boost::is_any_of(", "), boost::token_compress_on);
    for (auto& item : items) {
      boost::trim(item);
      if (item.empty()) continue;
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (ec != std::errc{} || ptr != item.data() + item.size()) {
        throw ConfigError("sweep.attenuations: expected a number (got '" + item + "')");
      }
      plan.attenuations.push_back(v);
    }
  }
  if (auto v = doc.take_u64("sweep", "target_triples")) plan.target_triples = *v;
  if (auto v = doc.take_u64("sweep", "max_bins")) plan.max_bins = *v;
  if (auto v = doc.take_u64("sweep", "background_bins")) plan.background_bins = *v;
  if (auto v = doc.take("sweep", "theory")) plan.theory = parse_theory(*v);
  doc.reject_leftovers({"sweep"});
  validate_plan(plan);
  return plan;
}

SweepPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open sweep plan");
  return parse_plan(in, path.string());
}

std::string plan_to_ini(const SweepPlan& plan) {
  std::ostringstream out;
  out << std::setprecision(17) << "[sweep]\nattenuations = ";
  for (std::size_t i = 0; i < plan.attenuations.size(); ++i) {
    out << (i ? ", " : "") << plan.attenuations[i];
  }
  out << "\ntarget_triples = " << plan.target_triples << "\nmax_bins = " << plan.max_bins
      << "\nbackground_bins = " << plan.background_bins << "\n";
  if (plan.theory) out << "theory = " << theory_name(*plan.theory) << "\n";
  return out.str();
}

namespace {

ExperimentConfig with_plan_theory(const ExperimentConfig& base, const SweepPlan& plan) {
  ExperimentConfig cfg = base;
  if (plan.theory) cfg.theory = *plan.theory;
  return cfg;
}

}  // namespace

ExperimentConfig point_config(const ExperimentConfig& base, const SweepPlan& plan, double alpha) {
  ExperimentConfig cfg = with_plan_theory(base, plan);
  cfg.optics.attenuation = alpha;
  if (plan.max_bins > 0) cfg.n_bins = plan.max_bins;
  cfg.segment_bins = std::min(cfg.segment_bins, cfg.n_bins);
  return cfg;
}

ExperimentConfig background_config(const ExperimentConfig& base, const SweepPlan& plan) {
  ExperimentConfig cfg = with_plan_theory(base, plan);
  cfg.source.pair_mean_per_bin = 0.0;
  if (cfg.pcsft) cfg.pcsft->incident_power = 0.0;
  cfg.n_bins = plan.background_bins;
  cfg.segment_bins = std::min(cfg.segment_bins, cfg.n_bins);
  return cfg;
}

SweepResult run_sweep(const ExperimentConfig& base, const SweepPlan& plan, unsigned threads) {
  validate_plan(plan);
  SweepResult result;
  result.base = validate_config(with_plan_theory(base, plan));

  for (std::size_t i = 0; i < plan.attenuations.size(); ++i) {
    SweepPoint point;
    point.attenuation = plan.attenuations[i];
    try {
      const ExperimentConfig cfg = point_config(result.base, plan, point.attenuation);
      auto run = run_counts(cfg, plan.target_triples, i, threads);
      point.counts = std::move(run.counts);
      point.reached_target = run.reached_target;
    } catch (const std::exception& e) {
      point.error = e.what();
    }
    result.points.push_back(std::move(point));
  }
  if (plan.background_bins > 0) {
    const ExperimentConfig cfg = background_config(result.base, plan);
    result.background = run_counts(cfg, 0, plan.attenuations.size(), threads).counts;
  }
  return result;
}

}  // namespace g2sim
