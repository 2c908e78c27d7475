#include "g2sim/report.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "g2sim/errors.hpp"
#include "g2sim/pcsft_model.hpp"
#include "g2sim/qm_source.hpp"

namespace g2sim {

namespace {

using json = nlohmann::ordered_json;

G2Estimate estimate(const CoincidenceCounts& counts, const ReportOptions& options) {
  return options.block_segments > 0 ? segmented_g2(counts, options.block_segments)
                                    : heralded_g2(counts);
}

}  // namespace

Report build_report(const std::vector<AnalysisInput>& inputs,
                    const std::optional<CoincidenceCounts>& background,
                    const ExperimentConfig& cfg, const ReportOptions& options) {
  Report report;
  report.theory = std::string(theory_name(cfg.theory));
  report.bin_width = cfg.detectors.bin_width;
  report.eta_herald = cfg.optics.eta_herald;
  report.eta_1 = cfg.optics.eta_1;
  report.eta_2 = cfg.optics.eta_2;
  report.single_pair_prob = pair_prob(cfg.source.pair_mean_per_bin, cfg.source.mode_count, 1);
  // Without a pulse model the widest window the bound allows is one bin.
  report.pulse_duration = cfg.pcsft ? cfg.pcsft->pulse_duration : cfg.detectors.bin_width;
  report.background_subtracted = background.has_value();
  report.estimator = options.block_segments > 0 ? "segmented" : "pooled";

  for (const auto& in : inputs) {
    ReportPoint p;
    p.label = in.label;
    p.attenuation = in.attenuation;
    p.reached_target = in.reached_target;
    p.error = in.error;
    if (!p.error) {
      try {
        if (in.counts.bin_width != report.bin_width) {
          throw FormatError("bin width " + std::to_string(in.counts.bin_width) +
                            " differs from the config");
        }
        G2Estimate raw = estimate(in.counts, options);
        attach_rate(raw, cfg.optics);
        if (raw.upper_limit) p.flags.emplace_back("upper_limit");
        p.raw = raw;
        if (in.counts.total_bins > 0) {
          p.bound_counts = bound_counts(report.pulse_duration, report.bin_width,
                                        in.counts.totals.one, in.counts.totals.two,
                                        in.counts.duration());
        }
        if (cfg.pcsft && in.attenuation) {
          const double pulse_energy =
              cfg.pcsft->incident_power * *in.attenuation * cfg.pcsft->pulse_duration;
          p.bound_energy = g2sim::bound_energy(cfg.pcsft->pulse_duration, report.bin_width,
                                               pulse_energy, cfg.pcsft->threshold_energy);
        }
        if (background) {
          const CoincidenceCounts sub = background_subtract(in.counts, *background);
          for (const auto& f : sub.clamped) p.flags.push_back("clamped:" + f);
          if (sub.totals.herald_one > 0.0 && sub.totals.herald_two > 0.0) {
            G2Estimate corrected = heralded_g2(sub);
            attach_rate(corrected, cfg.optics);
            if (corrected.upper_limit) p.flags.emplace_back("bgsub_upper_limit");
            p.corrected = corrected;
          } else {
            // Nothing left above background; the raw estimate still stands.
            p.flags.emplace_back("bgsub_no_signal");
          }
        }
      } catch (const std::exception& e) {
        p.error = e.what();
      }
    }
    report.points.push_back(std::move(p));
  }

  report.fit_series = background ? "background_subtracted" : "raw";
  std::vector<FitPoint> fit_points;
  for (const auto& p : report.points) {
    const auto& e = background ? p.corrected : p.raw;
    if (!p.error && e) fit_points.push_back({e->x_rate, e->value, e->sigma});
  }
  try {
    report.fit = weighted_linear_fit(fit_points);
  } catch (const Error& e) {
    report.fit_note = e.what();
  }

  if (cfg.optics.eta_herald > 0.0) {
    std::vector<double> xs;
    for (const auto& p : report.points) {
      if (p.raw) xs.push_back(p.raw->x_rate);
      if (p.corrected) xs.push_back(p.corrected->x_rate);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    const QmBand band = qm_band(report.single_pair_prob, cfg.optics.eta_herald);
    for (double x : xs) report.band.push_back({x, band.lower, band.upper});
  }
  return report;
}

Report build_report(const SweepResult& sweep, const ReportOptions& options) {
  std::vector<AnalysisInput> inputs;
  for (const auto& p : sweep.points) {
    std::ostringstream label;
    label << "alpha=" << p.attenuation;
    inputs.push_back({label.str(), p.attenuation, p.counts, p.reached_target, p.error});
  }
  return build_report(inputs, sweep.background, sweep.base, options);
}

bool has_failures(const Report& report) {
  return std::any_of(report.points.begin(), report.points.end(),
                     [](const ReportPoint& p) { return p.error.has_value(); });
}

namespace {

json counts_json(const CountSet& c) {
  return json{{"N_H", c.herald},        {"N_1", c.one},        {"N_2", c.two},
              {"N_H1", c.herald_one},   {"N_H2", c.herald_two}, {"N_12", c.one_two},
              {"N_H12", c.triple}};
}

CountSet counts_from(const json& j) {
  CountSet c;
  c.herald = j.at("N_H").get<double>();
  c.one = j.at("N_1").get<double>();
  c.two = j.at("N_2").get<double>();
  c.herald_one = j.at("N_H1").get<double>();
  c.herald_two = j.at("N_H2").get<double>();
  c.one_two = j.at("N_12").get<double>();
  c.triple = j.at("N_H12").get<double>();
  return c;
}

json estimate_json(const G2Estimate& e) {
  return json{{"value", e.value},   {"sigma", e.sigma},          {"upper_limit", e.upper_limit},
              {"x_rate", e.x_rate}, {"x_sigma", e.x_sigma},      {"bins", e.bins},
              {"bin_width", e.bin_width}, {"counts", counts_json(e.counts)},
              {"variance", counts_json(e.variance)}};
}

G2Estimate estimate_from(const json& j) {
  G2Estimate e;
  e.value = j.at("value").get<double>();
  e.sigma = j.at("sigma").get<double>();
  e.upper_limit = j.at("upper_limit").get<bool>();
  e.x_rate = j.at("x_rate").get<double>();
  e.x_sigma = j.at("x_sigma").get<double>();
  e.bins = j.at("bins").get<std::uint64_t>();
  e.bin_width = j.at("bin_width").get<double>();
  e.counts = counts_from(j.at("counts"));
  e.variance = counts_from(j.at("variance"));
  return e;
}

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  if (v) {
    j[key] = *v;
  } else {
    j[key] = nullptr;
  }
}

template <typename T>
std::optional<T> get_optional(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

void write_report_json(std::ostream& out, const Report& r) {
  json j;
  j["report_version"] = kReportVersion;
  j["theory"] = r.theory;
  j["bin_width"] = r.bin_width;
  j["efficiencies"] = {{"eta_h", r.eta_herald}, {"eta_1", r.eta_1}, {"eta_2", r.eta_2}};
  j["single_pair_prob"] = r.single_pair_prob;
  j["pulse_duration"] = r.pulse_duration;
  j["background_subtracted"] = r.background_subtracted;
  j["estimator"] = r.estimator;
  json points = json::array();
  for (const auto& p : r.points) {
    json jp;
    jp["label"] = p.label;
    put_optional(jp, "attenuation", p.attenuation);
    jp["raw"] = p.raw ? estimate_json(*p.raw) : json(nullptr);
    jp["background_subtracted"] = p.corrected ? estimate_json(*p.corrected) : json(nullptr);
    put_optional(jp, "bound_counts", p.bound_counts);
    put_optional(jp, "bound_energy", p.bound_energy);
    put_optional(jp, "reached_target", p.reached_target);
    jp["flags"] = p.flags;
    put_optional(jp, "error", p.error);
    points.push_back(std::move(jp));
  }
  j["points"] = std::move(points);
  j["fit_series"] = r.fit_series;
  if (r.fit) {
    const auto& f = *r.fit;
    j["fit"] = {{"A", f.slope},
                {"B", f.intercept},
                {"sigma_A", f.slope_sigma()},
                {"sigma_B", f.intercept_sigma()},
                {"covariance", {{f.covariance[0][0], f.covariance[0][1]},
                                {f.covariance[1][0], f.covariance[1][1]}}},
                {"chi2", f.chi2},
                {"reduced_chi2", f.reduced_chi2},
                {"dof", f.dof}};
  } else {
    j["fit"] = nullptr;
  }
  j["fit_note"] = r.fit_note;
  json band = json::array();
  for (const auto& b : r.band) band.push_back({{"x", b.x}, {"lower", b.lower}, {"upper", b.upper}});
  j["qm_band"] = std::move(band);
  out << j.dump(2) << "\n";
}

Report read_report_json(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(std::string("report: not valid JSON: ") + e.what());
  }
  try {
    if (j.at("report_version").get<int>() != kReportVersion) {
      throw FormatError("report: unsupported report_version " +
                        j.at("report_version").dump());
    }
    Report r;
    r.theory = j.at("theory").get<std::string>();
    r.bin_width = j.at("bin_width").get<double>();
    r.eta_herald = j.at("efficiencies").at("eta_h").get<double>();
    r.eta_1 = j.at("efficiencies").at("eta_1").get<double>();
    r.eta_2 = j.at("efficiencies").at("eta_2").get<double>();
    r.single_pair_prob = j.at("single_pair_prob").get<double>();
    r.pulse_duration = j.at("pulse_duration").get<double>();
    r.background_subtracted = j.at("background_subtracted").get<bool>();
    r.estimator = j.at("estimator").get<std::string>();
    for (const auto& jp : j.at("points")) {
      ReportPoint p;
      p.label = jp.at("label").get<std::string>();
      p.attenuation = get_optional<double>(jp, "attenuation");
      if (!jp.at("raw").is_null()) p.raw = estimate_from(jp.at("raw"));
      if (!jp.at("background_subtracted").is_null()) {
        p.corrected = estimate_from(jp.at("background_subtracted"));
      }
      p.bound_counts = get_optional<double>(jp, "bound_counts");
      p.bound_energy = get_optional<double>(jp, "bound_energy");
      p.reached_target = get_optional<bool>(jp, "reached_target");
      p.flags = jp.at("flags").get<std::vector<std::string>>();
      p.error = get_optional<std::string>(jp, "error");
      r.points.push_back(std::move(p));
    }
    r.fit_series = j.at("fit_series").get<std::string>();
    if (!j.at("fit").is_null()) {
      const auto& jf = j.at("fit");
      FitResult f;
      f.slope = jf.at("A").get<double>();
      f.intercept = jf.at("B").get<double>();
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) f.covariance[a][b] = jf.at("covariance")[a][b].get<double>();
      }
      f.chi2 = jf.at("chi2").get<double>();
      f.reduced_chi2 = jf.at("reduced_chi2").get<double>();
      f.dof = jf.at("dof").get<int>();
      r.fit = f;
    }
    r.fit_note = j.at("fit_note").get<std::string>();
    for (const auto& jb : j.at("qm_band")) {
      r.band.push_back({jb.at("x").get<double>(), jb.at("lower").get<double>(),
                        jb.at("upper").get<double>()});
    }
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("report: missing or malformed field: ") + e.what());
  }
}

void save_report_json(const std::filesystem::path& path, const Report& report) {
  std::ofstream out(path);
  if (!out) throw FormatError(path.string() + ": cannot open for writing");
  write_report_json(out, report);
}

Report load_report_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string() + ": cannot open");
  return read_report_json(in);
}

void write_report_csv(std::ostream& out, const Report& r) {
  const auto opt = [](const std::optional<double>& v) {
    if (!v) return std::string();
    std::ostringstream s;
    s << std::setprecision(17) << *v;
    return s.str();
  };
  out << "label,attenuation,x_rate,x_sigma,g2,g2_sigma,upper_limit,x_rate_bgsub,g2_bgsub,"
         "g2_bgsub_sigma,qm_lower,qm_upper,bound_counts,bound_energy,error\n";
  const std::optional<QmBand> band =
      r.eta_herald > 0.0 ? std::optional(qm_band(r.single_pair_prob, r.eta_herald))
                         : std::nullopt;
  for (const auto& p : r.points) {
    std::optional<double> x, xs, g, gs, xb, gb, gbs;
    if (p.raw) {
      x = p.raw->x_rate;
      xs = p.raw->x_sigma;
      g = p.raw->value;
      gs = p.raw->sigma;
    }
    if (p.corrected) {
      xb = p.corrected->x_rate;
      gb = p.corrected->value;
      gbs = p.corrected->sigma;
    }
    std::string error = p.error.value_or("");
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    out << p.label << ',' << opt(p.attenuation) << ',' << opt(x) << ',' << opt(xs) << ','
        << opt(g) << ',' << opt(gs) << ',' << (p.raw ? (p.raw->upper_limit ? "1" : "0") : "")
        << ',' << opt(xb) << ',' << opt(gb) << ',' << opt(gbs) << ','
        << opt(band ? std::optional(band->lower) : std::nullopt) << ','
        << opt(band ? std::optional(band->upper) : std::nullopt) << ',' << opt(p.bound_counts)
        << ',' << opt(p.bound_energy) << ',' << error << "\n";
  }
}

void save_report_csv(const std::filesystem::path& path, const Report& report) {
  std::ofstream out(path);
  if (!out) throw FormatError(path.string() + ": cannot open for writing");
  write_report_csv(out, report);
}

}  // namespace g2sim
