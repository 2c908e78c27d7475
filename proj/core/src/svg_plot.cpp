#include "g2sim/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "g2sim/errors.hpp"

namespace g2sim {

namespace {

constexpr double kWidth = 760.0;
constexpr double kHeight = 500.0;
constexpr double kLeft = 90.0;
constexpr double kRight = 30.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 70.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Round step for about `target` intervals over [lo, hi].
double nice_step(double lo, double hi, int target) {
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad(double fraction) {
    if (hi <= lo) {
      const double d = lo == 0.0 ? 1.0 : std::abs(lo) * 0.5;
      lo -= d;
      hi += d;
    }
    const double d = (hi - lo) * fraction;
    lo -= d;
    hi += d;
  }
};

struct Series {
  const G2Estimate* estimate;
  bool corrected;
};

}  // namespace

std::string render_svg(const Report& report) {
  std::vector<Series> series;
  for (const auto& p : report.points) {
    if (p.error) continue;
    if (p.raw) series.push_back({&*p.raw, false});
    if (p.corrected) series.push_back({&*p.corrected, true});
  }
  if (series.empty()) throw StatisticsError("plot: report has no points to plot");

  Range xr;
  Range yr;
  xr.add(0.0);
  yr.add(0.0);
  for (const auto& s : series) {
    xr.add(s.estimate->x_rate);
    yr.add(s.estimate->value - s.estimate->sigma);
    yr.add(s.estimate->value + s.estimate->sigma);
  }
  for (const auto& b : report.band) {
    yr.add(b.lower);
    yr.add(b.upper);
  }
  xr.pad(0.05);
  xr.lo = std::max(xr.lo, 0.0);
  if (report.fit) {
    yr.add(report.fit->slope * xr.lo + report.fit->intercept);
    yr.add(report.fit->slope * xr.hi + report.fit->intercept);
  }
  yr.pad(0.08);

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * plot_w; };
  auto py = [&](double y) { return kTop + (yr.hi - y) / (yr.hi - yr.lo) * plot_h; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n"
      << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">Heralded g\xC2\xB2(0), theory: "
      << escape(report.theory) << "</text>\n";

  if (!report.band.empty()) {
    double x0 = report.band.front().x;
    double x1 = report.band.back().x;
    std::vector<BandSample> band = report.band;
    if (band.size() == 1) {
      x0 = xr.lo;
      x1 = xr.hi;
      band = {{x0, report.band[0].lower, report.band[0].upper},
              {x1, report.band[0].lower, report.band[0].upper}};
    }
    svg << "<polygon class=\"qm-band\" fill=\"#9ecae1\" fill-opacity=\"0.45\" stroke=\"none\" "
           "points=\"";
    for (const auto& b : band) svg << num(px(b.x)) << ',' << num(py(b.upper)) << ' ';
    for (auto it = band.rbegin(); it != band.rend(); ++it) {
      svg << num(px(it->x)) << ',' << num(py(it->lower)) << ' ';
    }
    svg << "\"/>\n";
  }

  // Axes with ticks.
  std::ostringstream axis;
  axis << "M" << num(kLeft) << ' ' << num(kTop) << " V" << num(kTop + plot_h) << " H"
       << num(kLeft + plot_w);
  std::ostringstream labels;
  const double xs = nice_step(xr.lo, xr.hi, 6);
  for (double t = std::ceil(xr.lo / xs) * xs; t <= xr.hi + 1e-9 * xs; t += xs) {
    axis << " M" << num(px(t)) << ' ' << num(kTop + plot_h) << " v6";
    labels << "<text x=\"" << num(px(t)) << "\" y=\"" << num(kTop + plot_h + 22)
           << "\" text-anchor=\"middle\">" << tick_label(std::abs(t) < 1e-12 * xs ? 0.0 : t)
           << "</text>\n";
  }
  const double ys = nice_step(yr.lo, yr.hi, 6);
  for (double t = std::ceil(yr.lo / ys) * ys; t <= yr.hi + 1e-9 * ys; t += ys) {
    axis << " M" << num(kLeft) << ' ' << num(py(t)) << " h-6";
    labels << "<text x=\"" << num(kLeft - 10) << "\" y=\"" << num(py(t) + 4)
           << "\" text-anchor=\"end\">" << tick_label(std::abs(t) < 1e-12 * ys ? 0.0 : t)
           << "</text>\n";
  }
  svg << "<path class=\"axis\" fill=\"none\" stroke=\"black\" d=\"" << axis.str() << "\"/>\n"
      << "<g font-family=\"sans-serif\" font-size=\"12\">\n"
      << labels.str()
      << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"" << num(kHeight - 18)
      << "\" text-anchor=\"middle\">Efficiency-corrected signal rate (s\xE2\x81\xBB\xC2\xB9)"
      << "</text>\n"
      << "<text transform=\"translate(22," << num(kTop + plot_h / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">g\xC2\xB2(0) (dimensionless)</text>\n"
      << "</g>\n";

  if (report.fit) {
    svg << "<line class=\"fit\" stroke=\"#d62728\" stroke-width=\"1.5\" x1=\"" << num(px(xr.lo))
        << "\" y1=\"" << num(py(report.fit->slope * xr.lo + report.fit->intercept))
        << "\" x2=\"" << num(px(xr.hi)) << "\" y2=\""
        << num(py(report.fit->slope * xr.hi + report.fit->intercept)) << "\"/>\n";
  }

  for (const auto& s : series) {
    const G2Estimate& e = *s.estimate;
    const double x = px(e.x_rate);
    const double y0 = py(e.value - e.sigma);
    const double y1 = py(e.value + e.sigma);
    svg << "<path class=\"errorbar\" stroke=\"black\" d=\"M" << num(x) << ' ' << num(y0) << " V"
        << num(y1) << " M" << num(x - 4) << ' ' << num(y0) << " h8 M" << num(x - 4) << ' '
        << num(y1) << " h8\"/>\n";
    if (s.corrected) {
      svg << "<rect class=\"point-bgsub\" fill=\"#ff7f0e\" x=\"" << num(x - 4) << "\" y=\""
          << num(py(e.value) - 4) << "\" width=\"8\" height=\"8\"/>\n";
    } else {
      svg << "<circle class=\"point-raw\" fill=\"#1f77b4\" cx=\"" << num(x) << "\" cy=\""
          << num(py(e.value)) << "\" r=\"4\"/>\n";
    }
  }

  svg << "<g font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<text x=\"" << num(kLeft + 12) << "\" y=\"" << num(kTop + 16)
      << "\" fill=\"#1f77b4\">\xE2\x97\x8F raw</text>\n";
  if (report.background_subtracted) {
    svg << "<text x=\"" << num(kLeft + 12) << "\" y=\"" << num(kTop + 32)
        << "\" fill=\"#ff7f0e\">\xE2\x96\xA0 background subtracted</text>\n";
  }
  if (!report.band.empty()) {
    svg << "<text x=\"" << num(kLeft + 12) << "\" y=\"" << num(kTop + 48)
        << "\" fill=\"#3182bd\">band: QM prediction, G from 1 to 2</text>\n";
  }
  if (report.fit) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "fit: A = %.3g \xC2\xB1 %.2g s, B = %.4g \xC2\xB1 %.2g",
                  report.fit->slope, report.fit->slope_sigma(), report.fit->intercept,
                  report.fit->intercept_sigma());
    svg << "<text x=\"" << num(kLeft + 12) << "\" y=\"" << num(kTop + 64)
        << "\" fill=\"#d62728\">" << buf << "</text>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

void save_svg(const std::filesystem::path& path, const Report& report) {
  const std::string text = render_svg(report);
  std::ofstream out(path);
  if (!out) throw FormatError(path.string() + ": cannot open for writing");
  out << text;
}

}  // namespace g2sim
