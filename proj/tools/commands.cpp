#include "commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include "g2sim/analysis.hpp"
#include "g2sim/click_streams.hpp"
#include "g2sim/coincidence.hpp"
#include "g2sim/config_io.hpp"
#include "g2sim/errors.hpp"
#include "g2sim/pcsft_model.hpp"
#include "g2sim/report.hpp"
#include "g2sim/run.hpp"
#include "g2sim/svg_plot.hpp"
#include "g2sim/sweep.hpp"

namespace g2sim::cli {

namespace fs = std::filesystem;

namespace {

// Shortest round-trip decimal without an exponent.
std::string plain(double v) {
  char buf[512];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  if (ec != std::errc{}) return std::to_string(v);
  return std::string(buf, ptr);
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct RunOptions {
  std::string config;
  std::string sweep;
  std::string out;
  std::string background;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> bins;
  unsigned threads = 1;
  std::vector<std::string> inputs;
};

ExperimentConfig load_with_overrides(const RunOptions& o) {
  ExperimentConfig cfg = load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.bins) {
    cfg.n_bins = *o.bins;
    cfg.segment_bins = std::min(cfg.segment_bins, cfg.n_bins);
  }
  return validate_config(cfg);
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << "\n";
}

void print_points(const Report& report, std::ostream& out) {
  for (const auto& p : report.points) {
    out << p.label << ": ";
    if (p.error) {
      out << "FAILED (" << *p.error << ")\n";
      continue;
    }
    out << "g2 = " << sci(p.raw->value) << " +- " << sci(p.raw->sigma)
        << (p.raw->upper_limit ? " (no triples, upper limit)" : "")
        << ", x = " << sci(p.raw->x_rate) << " 1/s, triples = " << p.raw->counts.triple;
    if (p.corrected) {
      out << ", bg-subtracted g2 = " << sci(p.corrected->value) << " +- "
          << sci(p.corrected->sigma);
    }
    if (p.reached_target && !*p.reached_target) out << " [bin cap reached]";
    out << "\n";
  }
  if (report.fit) {
    const auto& f = *report.fit;
    out << "fit (" << report.fit_series << "): A = " << sci(f.slope) << " +- "
        << sci(f.slope_sigma()) << " s, B = " << sci(f.intercept) << " +- "
        << sci(f.intercept_sigma()) << ", reduced chi2 = " << sci(f.reduced_chi2)
        << " (dof " << f.dof << ")\n";
  } else {
    out << "fit skipped: " << report.fit_note << "\n";
  }
}

fs::path sibling_csv(const fs::path& json_path) {
  fs::path p = json_path;
  p.replace_extension(".csv");
  return p;
}

int cmd_simulate(const RunOptions& o, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = load_with_overrides(o);
  print_warnings(config_warnings(cfg), err);
  const ClickStreams streams = simulate(cfg, o.threads);
  const CoincidenceCounts counts = accumulate(streams, cfg.segment_bins);

  const fs::path dir(o.out);
  fs::create_directories(dir);
  save_pstm(dir / "streams.pstm", streams);
  save_counts_csv(dir / "counts.csv", counts);
  {
    std::ofstream json(dir / "counts.json");
    json << counts_summary_json(counts) << "\n";
  }

  const CountSet& t = counts.totals;
  const double T = counts.duration();
  out << "theory: " << theory_name(cfg.theory) << ", seed " << cfg.seed << "\n"
      << "bins: " << counts.total_bins << " (" << sci(T) << " s, " << counts.segments.size()
      << " segments)\n"
      << "singles: N_H = " << t.herald << ", N_1 = " << t.one << ", N_2 = " << t.two << "\n"
      << "rates: H = " << sci(t.herald / T) << " 1/s, 1 = " << sci(t.one / T)
      << " 1/s, 2 = " << sci(t.two / T) << " 1/s\n"
      << "pairs: N_H1 = " << t.herald_one << ", N_H2 = " << t.herald_two
      << ", N_12 = " << t.one_two << "; triples: N_H12 = " << t.triple << "\n";
  try {
    const G2Estimate g = heralded_g2(counts);
    out << "heralded g2 = " << sci(g.value) << " +- " << sci(g.sigma)
        << (g.upper_limit ? " (no triples, upper limit)" : "") << "\n";
  } catch (const StatisticsError& e) {
    out << "heralded g2: not estimable (" << e.what() << ")\n";
  }
  out << "wrote " << (dir / "streams.pstm").string() << ", " << (dir / "counts.csv").string()
      << ", " << (dir / "counts.json").string() << "\n";
  return kSuccess;
}

int cmd_sweep(const RunOptions& o, std::ostream& out, std::ostream& err) {
  RunOptions base_opts = o;
  base_opts.bins.reset();
  const ExperimentConfig cfg = load_with_overrides(base_opts);
  SweepPlan plan = load_plan(o.sweep);
  if (o.bins) plan.max_bins = *o.bins;
  print_warnings(config_warnings(cfg), err);
  print_warnings(plan_warnings(plan), err);

  const SweepResult result = run_sweep(cfg, plan, o.threads);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  for (std::size_t i = 0; i < result.points.size(); ++i) {
    const auto& p = result.points[i];
    if (p.error) continue;
    char name[32];
    std::snprintf(name, sizeof name, "point_%02zu_counts.csv", i);
    save_counts_csv(dir / name, p.counts);
  }
  if (result.background) save_counts_csv(dir / "background_counts.csv", *result.background);

  const Report report = build_report(result);
  save_report_json(dir / "report.json", report);
  save_report_csv(dir / "report.csv", report);
  print_points(report, out);
  out << "wrote " << (dir / "report.json").string() << " and "
      << (dir / "report.csv").string() << "\n";
  if (has_failures(report)) {
    err << "error: at least one sweep point failed\n";
    return kFailure;
  }
  return kSuccess;
}

int cmd_analyze(const RunOptions& o, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = load_with_overrides(o);
  std::vector<AnalysisInput> inputs;
  for (const auto& path : o.inputs) {
    inputs.push_back({fs::path(path).filename().string(), std::nullopt, load_counts_csv(path),
                      std::nullopt, std::nullopt});
  }
  std::optional<CoincidenceCounts> background;
  if (!o.background.empty()) {
    background = load_counts_csv(o.background);
  } else {
    out << "no background file: raw estimates only\n";
  }
  const Report report = build_report(inputs, background, cfg);
  const fs::path json_path(o.out);
  if (json_path.has_parent_path()) fs::create_directories(json_path.parent_path());
  save_report_json(json_path, report);
  save_report_csv(sibling_csv(json_path), report);
  print_points(report, out);
  for (const auto& p : report.points) {
    for (const auto& f : p.flags) err << "warning: " << p.label << ": " << f << "\n";
  }
  out << "wrote " << json_path.string() << " and " << sibling_csv(json_path).string() << "\n";
  return has_failures(report) ? kFailure : kSuccess;
}

int cmd_plot(const RunOptions& o, std::ostream& out) {
  const Report report = load_report_json(o.inputs.front());
  const std::string svg = render_svg(report);
  std::ofstream file(o.out);
  if (!file) throw FormatError(o.out + ": cannot open for writing");
  file << svg;
  out << "wrote " << o.out << "\n";
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"g2sim: heralded g2(0) simulator for quantum and classical-field detection models",
               "g2sim"};
  app.require_subcommand(1);
  RunOptions o;

  auto add_run_flags = [&o](CLI::App* sub, bool seed_and_bins) {
    sub->add_option("--threads", o.threads, "Worker threads (results do not depend on it)")
        ->check(CLI::Range(1U, 1024U));
    if (seed_and_bins) {
      sub->add_option("--seed", o.seed, "Override run.seed");
      sub->add_option("--bins", o.bins, "Override the bin count (bin cap for sweeps)")
          ->check(CLI::PositiveNumber);
    }
  };

  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate one run and count coincidences");
  simulate_cmd->add_option("--config", o.config, "Experiment INI file")->required();
  simulate_cmd->add_option("--out", o.out, "Output directory")->required();
  add_run_flags(simulate_cmd, true);

  auto* sweep_cmd = app.add_subcommand("sweep", "Run an attenuation sweep and fit g2 against rate");
  sweep_cmd->add_option("--config", o.config, "Experiment INI file")->required();
  sweep_cmd->add_option("--sweep", o.sweep, "Sweep plan INI file")->required();
  sweep_cmd->add_option("--out", o.out, "Output directory")->required();
  add_run_flags(sweep_cmd, true);

  auto* analyze_cmd = app.add_subcommand("analyze", "Analyze stored counts CSV files");
  analyze_cmd->add_option("counts", o.inputs, "Counts CSV files, one per point")->required();
  analyze_cmd->add_option("--config", o.config, "Experiment INI file (efficiencies, source)")
      ->required();
  analyze_cmd->add_option("--background", o.background, "Background counts CSV");
  analyze_cmd->add_option("--out", o.out, "Report JSON path (CSV written alongside)")
      ->required();

  auto* plot_cmd = app.add_subcommand("plot", "Render a report as SVG");
  plot_cmd->add_option("report", o.inputs, "Report JSON")->required()->expected(1);
  plot_cmd->add_option("--out", o.out, "SVG path")->required();

  double delta = 0.0, bin_width = kDefaultBinWidth, pulse_energy = 0.0, threshold = 0.0;
  double n1 = 0.0, n2 = 0.0, total_time = 0.0;
  auto* be_cmd = app.add_subcommand("bound-energy", "g2 bound from pulse energy");
  be_cmd->add_option("--delta", delta, "Pulse duration, s")->required();
  be_cmd->add_option("--bin-width", bin_width, "Bin width, s")->capture_default_str();
  be_cmd->add_option("--pulse-energy", pulse_energy, "Mean pulse energy")->required();
  be_cmd->add_option("--threshold", threshold, "Threshold energy E_d")->required();

  auto* bc_cmd = app.add_subcommand("bound-counts", "g2 bound from detector counts");
  bc_cmd->add_option("--delta", delta, "Pulse duration, s")->required();
  bc_cmd->add_option("--bin-width", bin_width, "Bin width, s")->capture_default_str();
  bc_cmd->add_option("--n1", n1, "Counts on detector 1")->required();
  bc_cmd->add_option("--n2", n2, "Counts on detector 2")->required();
  bc_cmd->add_option("--time", total_time, "Integration time, s")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kConfigError;
  }

  try {
    if (*simulate_cmd) return cmd_simulate(o, out, err);
    if (*sweep_cmd) return cmd_sweep(o, out, err);
    if (*analyze_cmd) return cmd_analyze(o, out, err);
    if (*plot_cmd) return cmd_plot(o, out);
    if (*be_cmd) {
      out << plain(bound_energy(delta, bin_width, pulse_energy, threshold)) << "\n";
      return kSuccess;
    }
    if (*bc_cmd) {
      out << plain(bound_counts(delta, bin_width, n1, n2, total_time)) << "\n";
      return kSuccess;
    }
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace g2sim::cli
