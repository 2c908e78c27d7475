#include "g2sim/coincidence.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <fstream>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "g2sim/errors.hpp"

namespace g2sim {

namespace {

constexpr std::array<const char*, 7> kFieldNames{"N_H",  "N_1",  "N_2",  "N_H1",
                                                 "N_H2", "N_12", "N_H12"};

std::array<double*, 7> fields(CountSet& c) {
  return {&c.herald, &c.one, &c.two, &c.herald_one, &c.herald_two, &c.one_two, &c.triple};
}
std::array<double, 7> values(const CountSet& c) {
  return {c.herald, c.one, c.two, c.herald_one, c.herald_two, c.one_two, c.triple};
}

inline double pc(std::uint64_t w) { return static_cast<double>(std::popcount(w)); }

// Counts over bins [begin, end).
CountSet count_range(const ClickStreams& s, std::uint64_t begin, std::uint64_t end) {
  CountSet c;
  if (begin >= end) return c;
  const auto h = s.words(Channel::herald);
  const auto a = s.words(Channel::one);
  const auto b = s.words(Channel::two);
  const std::uint64_t first = begin >> 6;
  const std::uint64_t last = (end - 1) >> 6;
  std::uint64_t nh = 0, n1 = 0, n2 = 0, nh1 = 0, nh2 = 0, n12 = 0, nh12 = 0;
  for (std::uint64_t w = first; w <= last; ++w) {
    std::uint64_t mask = ~std::uint64_t{0};
    if (w == first) mask &= ~std::uint64_t{0} << (begin & 63);
    if (w == last && (end & 63) != 0) mask &= (std::uint64_t{1} << (end & 63)) - 1;
    const std::uint64_t hw = h[w] & mask;
    const std::uint64_t aw = a[w] & mask;
    const std::uint64_t bw = b[w] & mask;
    nh += std::popcount(hw);
    n1 += std::popcount(aw);
    n2 += std::popcount(bw);
    nh1 += std::popcount(hw & aw);
    nh2 += std::popcount(hw & bw);
    n12 += std::popcount(aw & bw);
    nh12 += std::popcount(hw & aw & bw);
  }
  c.herald = static_cast<double>(nh);
  c.one = static_cast<double>(n1);
  c.two = static_cast<double>(n2);
  c.herald_one = static_cast<double>(nh1);
  c.herald_two = static_cast<double>(nh2);
  c.one_two = static_cast<double>(n12);
  c.triple = static_cast<double>(nh12);
  return c;
}

// Shortest text that parses back to the same double.
std::string format_count(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ec == std::errc{} ? ptr : buf);
}

double parse_number(std::string_view text, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw FormatError("counts CSV line " + std::to_string(line) + ": bad number '" +
                      std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

CountSet& CountSet::operator+=(const CountSet& o) noexcept {
  herald += o.herald;
  one += o.one;
  two += o.two;
  herald_one += o.herald_one;
  herald_two += o.herald_two;
  one_two += o.one_two;
  triple += o.triple;
  return *this;
}

CoincidenceCounts accumulate(const ClickStreams& streams, std::uint64_t segment_bins) {
  if (segment_bins == 0) throw DomainError("accumulate: segment_bins must be >= 1");
  CoincidenceCounts out;
  out.bin_width = streams.bin_width();
  out.total_bins = streams.n_bins();
  const std::uint64_t n = streams.n_bins();
  out.segments.reserve(static_cast<std::size_t>((n + segment_bins - 1) / segment_bins));
  for (std::uint64_t begin = 0; begin < n; begin += segment_bins) {
    const std::uint64_t end = std::min(n, begin + segment_bins);
    SegmentCounts seg;
    seg.bins = end - begin;
    seg.partial = seg.bins < segment_bins;
    seg.counts = count_range(streams, begin, end);
    out.totals += seg.counts;
    out.segments.push_back(seg);
  }
  return out;
}

CoincidenceCounts merge(const CoincidenceCounts& a, const CoincidenceCounts& b) {
  if (a.bin_width == 0.0 && a.segments.empty() && a.total_bins == 0) return b;
  if (b.bin_width == 0.0 && b.segments.empty() && b.total_bins == 0) return a;
  if (a.bin_width != b.bin_width) {
    throw FormatError("merge: bin width mismatch (" + format_count(a.bin_width) + " vs " +
                      format_count(b.bin_width) + ")");
  }
  CoincidenceCounts out = a;
  out.segments.insert(out.segments.end(), b.segments.begin(), b.segments.end());
  out.totals += b.totals;
  out.total_bins += b.total_bins;
  if (a.variance || b.variance) out.variance = a.total_variance() + b.total_variance();
  for (const auto& f : b.clamped) {
    if (std::find(out.clamped.begin(), out.clamped.end(), f) == out.clamped.end()) {
      out.clamped.push_back(f);
    }
  }
  return out;
}

CoincidenceCounts brute_force_counts(const ClickStreams& streams) {
  CoincidenceCounts out;
  out.bin_width = streams.bin_width();
  out.total_bins = streams.n_bins();
  CountSet c;
  for (std::uint64_t i = 0; i < streams.n_bins(); ++i) {
    const bool h = streams.click(Channel::herald, i);
    const bool a = streams.click(Channel::one, i);
    const bool b = streams.click(Channel::two, i);
    c.herald += h;
    c.one += a;
    c.two += b;
    c.herald_one += h && a;
    c.herald_two += h && b;
    c.one_two += a && b;
    c.triple += h && a && b;
  }
  out.totals = c;
  if (streams.n_bins() > 0) out.segments.push_back({streams.n_bins(), c, false});
  return out;
}

std::optional<std::string> check_invariants(const CoincidenceCounts& counts) {
  auto check_set = [](const CountSet& c, double bins) -> std::optional<std::string> {
    if (c.herald_one > std::min(c.herald, c.one)) return "N_H1 exceeds a single count";
    if (c.herald_two > std::min(c.herald, c.two)) return "N_H2 exceeds a single count";
    if (c.one_two > std::min(c.one, c.two)) return "N_12 exceeds a single count";
    if (c.triple > std::min({c.herald_one, c.herald_two, c.one_two})) {
      return "N_H12 exceeds a pair count";
    }
    for (double v : values(c)) {
      if (v < 0.0 || v > bins) return "count outside [0, bins]";
    }
    return std::nullopt;
  };
  CountSet sum;
  std::uint64_t bins = 0;
  for (std::size_t i = 0; i < counts.segments.size(); ++i) {
    const auto& s = counts.segments[i];
    if (auto e = check_set(s.counts, static_cast<double>(s.bins))) {
      return "segment " + std::to_string(i) + ": " + *e;
    }
    sum += s.counts;
    bins += s.bins;
  }
  if (auto e = check_set(counts.totals, static_cast<double>(counts.total_bins))) {
    return "totals: " + *e;
  }
  if (!counts.segments.empty() && (sum != counts.totals || bins != counts.total_bins)) {
    return "totals differ from the sum of segments";
  }
  return std::nullopt;
}

void write_counts_csv(std::ostream& out, const CoincidenceCounts& counts) {
  out << "# counts_version=" << kCountsVersion << "\n";
  out << "# bin_width=" << format_count(counts.bin_width) << "\n";
  if (counts.variance) {
    out << "# variance=";
    const auto v = values(*counts.variance);
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? ";" : "") << format_count(v[i]);
    out << "\n";
  }
  if (!counts.clamped.empty()) {
    out << "# clamped=";
    for (std::size_t i = 0; i < counts.clamped.size(); ++i) {
      out << (i ? ";" : "") << counts.clamped[i];
    }
    out << "\n";
  }
  out << "segment_index,bins";
  for (const char* name : kFieldNames) out << ',' << name;
  out << "\n";
  for (std::size_t i = 0; i < counts.segments.size(); ++i) {
    const auto& s = counts.segments[i];
    out << i << ',' << s.bins;
    for (double v : values(s.counts)) out << ',' << format_count(v);
    out << "\n";
  }
}

CoincidenceCounts read_counts_csv(std::istream& in) {
  CoincidenceCounts out;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  bool have_version = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string_view body = std::string_view(line).substr(1);
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      auto key = body.substr(0, eq);
      while (!key.empty() && key.front() == ' ') key.remove_prefix(1);
      const auto value = body.substr(eq + 1);
      if (key == "counts_version") {
        if (parse_number(value, line_no) != kCountsVersion) {
          throw FormatError("counts CSV: unsupported version '" + std::string(value) + "'");
        }
        have_version = true;
      } else if (key == "bin_width") {
        out.bin_width = parse_number(value, line_no);
      } else if (key == "variance") {
        const auto parts = split(value, ';');
        if (parts.size() != 7) throw FormatError("counts CSV: variance needs 7 values");
        CountSet v;
        auto f = fields(v);
        for (std::size_t i = 0; i < 7; ++i) *f[i] = parse_number(parts[i], line_no);
        out.variance = v;
      } else if (key == "clamped") {
        for (auto p : split(value, ';')) out.clamped.emplace_back(p);
      }
      continue;
    }
    const auto cols = split(line, ',');
    if (!have_header) {
      const std::vector<std::string_view> expected{"segment_index", "bins", "N_H",  "N_1", "N_2",
                                                   "N_H1",          "N_H2", "N_12", "N_H12"};
      if (cols != expected) throw FormatError("counts CSV: unexpected header '" + line + "'");
      have_header = true;
      continue;
    }
    if (cols.size() != 9) {
      throw FormatError("counts CSV line " + std::to_string(line_no) + ": expected 9 columns");
    }
    SegmentCounts seg;
    seg.bins = static_cast<std::uint64_t>(parse_number(cols[1], line_no));
    auto f = fields(seg.counts);
    for (std::size_t i = 0; i < 7; ++i) *f[i] = parse_number(cols[i + 2], line_no);
    out.totals += seg.counts;
    out.total_bins += seg.bins;
    out.segments.push_back(seg);
  }
  if (!have_version) throw FormatError("counts CSV: missing counts_version line");
  if (!have_header) throw FormatError("counts CSV: missing header");
  if (!(out.bin_width > 0.0)) throw FormatError("counts CSV: missing or invalid bin_width");
  if (!out.segments.empty()) {
    const std::uint64_t nominal = out.segments.front().bins;
    for (auto& s : out.segments) s.partial = s.bins < nominal;
  }
  return out;
}

void save_counts_csv(const std::filesystem::path& path, const CoincidenceCounts& counts) {
  std::ofstream out(path);
  if (!out) throw FormatError(path.string() + ": cannot open for writing");
  write_counts_csv(out, counts);
}

CoincidenceCounts load_counts_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string() + ": cannot open");
  return read_counts_csv(in);
}

std::string counts_summary_json(const CoincidenceCounts& counts) {
  nlohmann::ordered_json j;
  j["counts_version"] = kCountsVersion;
  j["bin_width"] = counts.bin_width;
  j["total_bins"] = counts.total_bins;
  j["duration_s"] = counts.duration();
  j["segments"] = counts.segments.size();
  auto& totals = j["totals"];
  const auto v = values(counts.totals);
  for (std::size_t i = 0; i < v.size(); ++i) totals[kFieldNames[i]] = v[i];
  if (counts.duration() > 0.0) {
    auto& rates = j["rates_per_s"];
    rates["N_H"] = counts.totals.herald / counts.duration();
    rates["N_1"] = counts.totals.one / counts.duration();
    rates["N_2"] = counts.totals.two / counts.duration();
  }
  j["clamped"] = counts.clamped;
  return j.dump(2);
}

}  // namespace g2sim
