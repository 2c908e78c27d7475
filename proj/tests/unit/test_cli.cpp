#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "g2sim/coincidence.hpp"
#include "g2sim/config_io.hpp"
#include "g2sim/report.hpp"
#include "g2sim/run.hpp"

namespace fs = std::filesystem;
using namespace g2sim;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("g2sim_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

const char* kQmConfig = R"([source]
pair_mean_per_bin = 0.05
mode_count = 2

[optics]
attenuation = 1.0
splitter_ratio = 0.5
eta_h = 0.5
eta_1 = 0.5
eta_2 = 0.5

[detectors]
dark_rate = 150

[run]
theory = qm
n_bins = 300000
segment_bins = 20000
seed = 42
)";

fs::path write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("simulate is bit-identical across repeats and thread counts") {
  TempDir dir("simulate");
  const auto cfg = write_file(dir.path / "qm.ini", kQmConfig);
  const auto a = run({"simulate", "--config", cfg, "--out", dir.path / "a"});
  const auto b = run({"simulate", "--config", cfg, "--out", dir.path / "b", "--threads", "3"});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  for (const char* f : {"streams.pstm", "counts.csv", "counts.json"}) {
    CHECK(slurp(dir.path / "a" / f) == slurp(dir.path / "b" / f));
    CHECK_FALSE(slurp(dir.path / "a" / f).empty());
  }
  CHECK(a.out.find("heralded g2 =") != std::string::npos);
  const auto c = run({"simulate", "--config", cfg, "--out", dir.path / "c", "--seed", "43"});
  CHECK(slurp(dir.path / "a" / "counts.csv") != slurp(dir.path / "c" / "counts.csv"));
}

TEST_CASE("simulate with no source reports zero source counts") {
  TempDir dir("nosource");
  std::string text = kQmConfig;
  text.replace(text.find("0.05"), 4, "0");
  text.replace(text.find("dark_rate = 150"), 15, "dark_rate = 0");
  const auto cfg = write_file(dir.path / "off.ini", text);
  const auto r = run({"simulate", "--config", cfg, "--out", dir.path / "out"});
  CHECK(r.code == 0);
  CHECK(r.out.find("N_H = 0, N_1 = 0, N_2 = 0") != std::string::npos);
  CHECK(r.out.find("N_H12 = 0") != std::string::npos);
}

TEST_CASE("classical theory without its block is a configuration error") {
  TempDir dir("nopcsft");
  std::string text = kQmConfig;
  text.replace(text.find("theory = qm"), 11, "theory = pcsft");
  const auto cfg = write_file(dir.path / "bad.ini", text);
  const auto r = run({"simulate", "--config", cfg, "--out", dir.path / "out"});
  CHECK(r.code == 2);
  CHECK(r.err.find("pcsft") != std::string::npos);
  CHECK_FALSE(fs::exists(dir.path / "out" / "counts.csv"));
}

TEST_CASE("usage errors exit 2") {
  CHECK(run({"simulate"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({}).code == 2);
}

TEST_CASE("analyze of stored counts equals the in-process pipeline") {
  TempDir dir("analyze");
  const auto cfg_path = write_file(dir.path / "qm.ini", kQmConfig);
  REQUIRE(run({"simulate", "--config", cfg_path, "--out", dir.path / "sim"}).code == 0);
  const auto r = run({"analyze", dir.path / "sim" / "counts.csv", "--config", cfg_path, "--out",
                      dir.path / "report.json"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("no background file: raw estimates only") != std::string::npos);
  CHECK(fs::exists(dir.path / "report.csv"));

  const auto cfg = load_config(cfg_path);
  const auto counts = accumulate(simulate(cfg), cfg.segment_bins);
  const auto in_process =
      build_report({{"counts.csv", std::nullopt, counts, std::nullopt, std::nullopt}},
                   std::nullopt, cfg);
  std::ostringstream expected;
  write_report_json(expected, in_process);
  CHECK(slurp(dir.path / "report.json") == expected.str());
  CHECK_FALSE(in_process.background_subtracted);
}

TEST_CASE("analyze with the signal as its own background raises flags") {
  TempDir dir("selfbg");
  const auto cfg = write_file(dir.path / "qm.ini", kQmConfig);
  REQUIRE(run({"simulate", "--config", cfg, "--out", dir.path / "sim"}).code == 0);
  const auto counts = dir.path / "sim" / "counts.csv";
  const auto r = run({"analyze", counts, "--config", cfg, "--background", counts, "--out",
                      dir.path / "report.json"});
  CHECK(r.code == 0);
  CHECK(r.err.find("bgsub_no_signal") != std::string::npos);
  const auto report = load_report_json(dir.path / "report.json");
  CHECK(report.background_subtracted);
  CHECK_FALSE(report.points.at(0).flags.empty());
}

TEST_CASE("analyze rejects a malformed counts file") {
  TempDir dir("badcounts");
  const auto cfg = write_file(dir.path / "qm.ini", kQmConfig);
  const auto bad = write_file(dir.path / "bad.csv", "# counts_version=9\n");
  const auto r = run({"analyze", bad, "--config", cfg, "--out", dir.path / "r.json"});
  CHECK(r.code == 1);
  CHECK(r.err.find("version") != std::string::npos);
}

TEST_CASE("sweep, then plot") {
  TempDir dir("sweep");
  const auto cfg = write_file(dir.path / "qm.ini", kQmConfig);
  const auto plan = write_file(dir.path / "plan.ini",
                               "[sweep]\nattenuations = 1.0, 0.7, 0.4\ntarget_triples = 40\n"
                               "max_bins = 2e6\nbackground_bins = 100000\n");
  const auto a = run({"sweep", "--config", cfg, "--sweep", plan, "--out", dir.path / "a"});
  const auto b = run({"sweep", "--config", cfg, "--sweep", plan, "--out", dir.path / "b",
                      "--threads", "2"});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  for (const char* f : {"point_00_counts.csv", "point_02_counts.csv", "background_counts.csv",
                        "report.json", "report.csv"}) {
    CHECK(slurp(dir.path / "a" / f) == slurp(dir.path / "b" / f));
  }
  CHECK(a.out.find("fit (background_subtracted)") != std::string::npos);

  const auto p = run({"plot", dir.path / "a" / "report.json", "--out", dir.path / "plot.svg"});
  CHECK(p.code == 0);
  CHECK(slurp(dir.path / "plot.svg").find("class=\"qm-band\"") != std::string::npos);
}

TEST_CASE("single-point sweep notes the skipped fit") {
  TempDir dir("onepoint");
  const auto cfg = write_file(dir.path / "qm.ini", kQmConfig);
  const auto plan = write_file(dir.path / "plan.ini", "[sweep]\nattenuations = 1.0\ntarget_triples = 20\n");
  const auto r = run({"sweep", "--config", cfg, "--sweep", plan, "--out", dir.path / "out"});
  CHECK(r.code == 0);
  CHECK(r.out.find("insufficient points") != std::string::npos);
  CHECK(r.out.find("alpha=1: g2 =") != std::string::npos);
}

TEST_CASE("plot of an empty report fails without writing") {
  TempDir dir("emptyplot");
  Report empty;
  empty.theory = "qm";
  save_report_json(dir.path / "empty.json", empty);
  const auto r = run({"plot", dir.path / "empty.json", "--out", dir.path / "x.svg"});
  CHECK(r.code == 1);
  CHECK_FALSE(fs::exists(dir.path / "x.svg"));
}

TEST_CASE("bound calculators print the plain arithmetic") {
  const auto e = run({"bound-energy", "--delta", "10e-9", "--pulse-energy", "0.01", "--threshold",
                      "1"});
  CHECK(e.code == 0);
  CHECK(e.out == "0.00960153624579933\n");
  const auto c = run({"bound-counts", "--delta", "20.83e-9", "--n1", "5e5", "--n2", "5e5",
                      "--time", "1"});
  CHECK(c.code == 0);
  CHECK(std::stod(c.out) == 2 * 1e6 * 20.83e-9);
  CHECK(run({"bound-counts", "--delta", "1e-9", "--n1", "1", "--n2", "1", "--time", "0"}).code ==
        1);
}
