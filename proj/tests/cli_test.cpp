#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gtest/gtest.h"

namespace spectral_tilt {
namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result run_cli(std::initializer_list<std::string> args, const std::string& stdin_bytes = "") {
  std::vector<std::string> owned{"spectral-tilt"};
  owned.insert(owned.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : owned) argv.push_back(a.c_str());
  std::istringstream in(stdin_bytes, std::ios::binary);
  std::ostringstream out(std::ios::binary);
  std::ostringstream err;
  Result r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), {in, out, err});
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string temp_path(const std::string& name) { return ::testing::TempDir() + "spectral_tilt_" + name; }

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary);
  f << bytes;
}

std::string samples_to_bytes(const std::vector<double>& x) {
  std::ostringstream os(std::ios::binary);
  io::write_samples(os, x);
  return os.str();
}

std::vector<double> bytes_to_samples(const std::string& bytes) {
  std::istringstream is(bytes, std::ios::binary);
  return io::read_samples(is, bytes.size() / 8);
}

TEST(CliDesignTest, AudioDefaults) {
  const Result r = run_cli({"design", "--alpha", "-0.5", "--order", "20", "--skip", "3", "--fmin", "20",
                            "--fmax", "20000"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j.at("r").get<double>(), 1.70125, 1e-5);
  EXPECT_EQ(j.at("poles_rad_s").size(), 20u);
  const Design d = make_design(SlopeSpec(-0.5), 20, 3, BandSpec(20.0, 20000.0));
  std::ostringstream expect;
  io::write_design(expect, d);
  EXPECT_EQ(r.out, expect.str());
  EXPECT_EQ(run_cli({"design", "--alpha", "-0.5"}).out, r.out);
}

TEST(CliDesignTest, FlatSlopeWritesMatchingRoots) {
  const Result r = run_cli({"design", "--alpha", "0"});
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("poles_rad_s"), j.at("zeros_rad_s"));
}

TEST(CliDesignTest, ValidationErrorsExitTwo) {
  Result r = run_cli({"design", "--alpha", "-0.5", "--order", "5", "--skip", "2"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("DegenerateOrder"), std::string::npos) << r.err;
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(run_cli({"design", "--alpha", "1.5"}).code, 2);
  EXPECT_EQ(run_cli({"design"}).code, 2);
  EXPECT_EQ(run_cli({"design", "--alpha", "abc"}).code, 2);
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
}

TEST(CliHelpTest, DocumentsFlags) {
  const Result top = run_cli({"--help"});
  EXPECT_EQ(top.code, 0);
  for (const char* sub : {"design", "bode", "digitize", "apply", "noise", "sweep"}) {
    EXPECT_NE(top.out.find(sub), std::string::npos) << sub;
  }
  const Result design = run_cli({"design", "--help"});
  EXPECT_EQ(design.code, 0);
  for (const char* flag : {"--alpha", "--order", "--skip", "--fmin", "--fmax", "--integer-part"}) {
    EXPECT_NE(design.out.find(flag), std::string::npos) << flag;
  }
}

TEST(CliBodeTest, EmitsReportForDesignFile) {
  const std::string design = run_cli({"design", "--alpha", "-0.5"}).out;
  const Result r = run_cli({"bode", "--design", "-", "--points-per-interval", "16"}, design);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("omega_rad_s,omega_ln,mag_db,phase_rad,slope_nepers,slope_error\n"),
            std::string::npos);
  const Design d = make_design(SlopeSpec(-0.5), 20, 3, BandSpec(20.0, 20000.0));
  std::ostringstream expect;
  io::write_bode_csv(expect, d, slope_report(d, 16));
  EXPECT_EQ(r.out, expect.str());
}

TEST(CliBodeTest, MalformedDesignExitsTwo) {
  EXPECT_EQ(run_cli({"bode", "--design", "-"}, "{\"alpha\": 0.1}").code, 2);
  EXPECT_EQ(run_cli({"bode", "--design", temp_path("missing.json")}).code, 2);
}

TEST(CliDigitizeTest, WritesCoefficientsAndReportsTruncation) {
  const std::string design = run_cli({"design", "--alpha", "-0.5"}).out;
  const Result r = run_cli({"digitize", "--design", "-", "--fs", "48000"}, design);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("truncated"), std::string::npos);
  std::istringstream is(r.out);
  const DigitalFilter f = io::read_coefficients(is);
  const DigitalDesign dd = digitize(make_design(SlopeSpec(-0.5), 20, 3, BandSpec(20.0, 20000.0)), 48000.0);
  ASSERT_EQ(f.sections.size(), dd.filter.sections.size());
  for (std::size_t k = 0; k < f.sections.size(); ++k) EXPECT_EQ(f.sections[k].a1, dd.filter.sections[k].a1);
  EXPECT_EQ(f.gain, dd.filter.gain);
}

TEST(CliDigitizeTest, RejectsLowSampleRate) {
  const std::string design = run_cli({"design", "--alpha", "-0.5", "--fmin", "100", "--fmax", "1000"}).out;
  EXPECT_EQ(run_cli({"digitize", "--design", "-", "--fs", "150"}, design).code, 2);
}

TEST(CliApplyTest, FlatDesignIsIdentity) {
  const std::string design_path = temp_path("flat.json");
  write_file(design_path, run_cli({"design", "--alpha", "0"}).out);
  std::vector<double> x(1000);
  NoiseSource(1).fill(x);
  const Result r = run_cli({"apply", "--design", design_path, "--fs", "48000"}, samples_to_bytes(x));
  ASSERT_EQ(r.code, 0) << r.err;
  const std::vector<double> y = bytes_to_samples(r.out);
  ASSERT_EQ(y.size(), x.size());
  for (std::size_t t = 0; t < x.size(); ++t) EXPECT_NEAR(y[t], x[t], 1e-12);
}

TEST(CliApplyTest, ImpulseThroughCoefficientFile) {
  const std::string coeffs_path = temp_path("coeffs.json");
  write_file(coeffs_path,
             R"({"sample_rate_hz": 8000, "gain": 2, "sections": [{"b0": 0.5, "b1": 0.25, "a1": -0.5}]})");
  const Result r = run_cli({"apply", "--coeffs", coeffs_path}, samples_to_bytes({1.0, 0.0, 0.0, 0.0}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(bytes_to_samples(r.out), (std::vector<double>{1.0, 1.0, 0.5, 0.25}));
}

TEST(CliApplyTest, SweepRunStaysFinite) {
  const std::string design_path = temp_path("pink.json");
  write_file(design_path, run_cli({"design", "--alpha", "-1"}).out);
  std::vector<double> x(48000);
  NoiseSource(2).fill(x);
  const Result r = run_cli({"apply", "--design", design_path, "--fs", "48000", "--alpha-sweep", "-1:1:1"},
                           samples_to_bytes(x));
  ASSERT_EQ(r.code, 0) << r.err;
  const std::vector<double> y = bytes_to_samples(r.out);
  ASSERT_EQ(y.size(), x.size());
  for (double v : y) {
    ASSERT_TRUE(std::isfinite(v));
    EXPECT_LT(std::abs(v), 10.0);
  }
}

TEST(CliApplyTest, NanInputExitsTwo) {
  const std::string design_path = temp_path("nan.json");
  write_file(design_path, run_cli({"design", "--alpha", "-0.5"}).out);
  const Result r =
      run_cli({"apply", "--design", design_path, "--fs", "48000"}, samples_to_bytes({1.0, std::nan("")}));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("NaN"), std::string::npos);
}

TEST(CliApplyTest, UsageErrors) {
  const std::string design_path = temp_path("usage.json");
  write_file(design_path, run_cli({"design", "--alpha", "-0.5"}).out);
  EXPECT_EQ(run_cli({"apply"}).code, 2);
  EXPECT_EQ(run_cli({"apply", "--design", design_path}).code, 2);
  EXPECT_EQ(run_cli({"apply", "--design", design_path, "--fs", "48000", "--alpha-sweep", "0:2:1"}).code, 2);
  EXPECT_EQ(run_cli({"apply", "--design", design_path, "--fs", "48000", "--alpha-sweep", "0-1-1"}).code, 2);
}

TEST(CliNoiseTest, DeterministicStream) {
  const Result a = run_cli({"noise", "--seed", "7", "--samples", "2048"});
  const Result b = run_cli({"noise", "--seed", "7", "--samples", "2048"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(bytes_to_samples(a.out), pink_noise(7, 2048, 48000.0, BandSpec(20.0, 20000.0)));
  EXPECT_NE(a.out, run_cli({"noise", "--seed", "8", "--samples", "2048"}).out);
  EXPECT_EQ(run_cli({"noise", "--samples", "0"}).code, 2);
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

TEST(CliSweepTest, TableShape) {
  const Result r = run_cli({"sweep", "--alpha", "-0.5", "--n-min", "10", "--n-max", "40", "--n-step", "2", "--k",
                            "3,0", "--points-per-interval", "32"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.front(), (std::vector<std::string>{"n", "k", "max_abs_slope_error"}));
  ASSERT_EQ(rows.size(), 1u + 16u * 2u);
  for (std::size_t i = 1; i < rows.size(); i += 2) {
    // Rows ordered by (n, k): K = 0 then K = 3 for each N.
    EXPECT_EQ(rows[i][1], "0");
    EXPECT_EQ(rows[i + 1][1], "3");
    EXPECT_EQ(rows[i][0], rows[i + 1][0]);
    EXPECT_LE(std::stod(rows[i + 1][2]), std::stod(rows[i][2])) << "N=" << rows[i][0];
  }
}

TEST(CliSweepTest, ErrorFallsWithOrderUntilEdgesDominate) {
  const Result r = run_cli({"sweep", "--alpha", "-0.5", "--n-min", "8", "--n-max", "14", "--k", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 8u);
  for (std::size_t i = 2; i < rows.size(); ++i) {
    EXPECT_LT(std::stod(rows[i][2]), std::stod(rows[i - 1][2])) << "N=" << rows[i][0];
  }
}

TEST(CliSweepTest, SingleRowEchoesSlopeReport) {
  const Result r = run_cli({"sweep", "--alpha", "-0.5", "--n-min", "20", "--n-max", "20", "--k", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 2u);
  const Design d = make_design(SlopeSpec(-0.5), 20, 3, BandSpec(20.0, 20000.0));
  EXPECT_EQ(rows[1][2], io::format_real(slope_report(d).max_abs_error_in_band));
}

TEST(CliSweepTest, EmptyGridExitsTwo) {
  EXPECT_EQ(run_cli({"sweep", "--alpha", "-0.5", "--n-min", "4", "--n-max", "6", "--k", "3"}).code, 2);
}

}  // namespace
}  // namespace spectral_tilt
