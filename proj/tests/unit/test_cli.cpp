#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "sparsagg/cli.hpp"
#include "sparsagg/csv.hpp"

namespace fs = std::filesystem;
using sparsagg::cli::dispatch;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::map<std::string, std::string> report(const std::string& text) {
  std::map<std::string, std::string> m;
  for (const auto& [k, v] : sparsagg::io::parse_key_values(text)) m[k] = v;
  return m;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sparsagg_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, HelpExitsZero) {
  const Result r = invoke({"fit", "--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE((r.out + r.err).find("--dict"), std::string::npos);
}

TEST_F(Cli, Version) {
  const Result r = invoke({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find(sparsagg::cli::version_string), std::string::npos);
}

TEST_F(Cli, UnknownSubcommandIsUsageError) { EXPECT_EQ(invoke({"frobnicate"}).code, 1); }

TEST_F(Cli, MissingRequiredOptionIsUsageError) { EXPECT_EQ(invoke({"fit", "--dict", "fourier:3"}).code, 1); }

TEST_F(Cli, MissingDataFileLeavesNoOutput) {
  const Result r = invoke({"fit", "--dict", "fourier:3", "--data", path("absent.csv"), "--out", path("coef.csv")});
  EXPECT_EQ(r.code, 3);
  EXPECT_FALSE(fs::exists(path("coef.csv")));
  EXPECT_TRUE(fs::is_empty(dir_));
}

TEST_F(Cli, FitWritesCoefficients) {
  std::string csv = "x,y\n";
  for (int i = 0; i < 64; ++i) {
    const double x = (i + 0.5) / 64.0;
    csv += sparsagg::io::format_double(x) + "," + sparsagg::io::format_double(2.0 + (i % 2 ? 0.1 : -0.1)) + "\n";
  }
  write("data.csv", csv);
  const Result r =
      invoke({"fit", "--dict", "fourier:3", "--data", path("data.csv"), "--out", path("coef.csv"), "--A", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rep = report(r.out);
  EXPECT_EQ(rep.at("n"), "64");
  EXPECT_TRUE(rep.count("kkt_residual"));
  const auto records = sparsagg::io::read_records(path("coef.csv"));
  ASSERT_EQ(records.size(), 4u);
  EXPECT_EQ(records[0], (std::vector<std::string>{"j", "lambda", "omega"}));
  EXPECT_GT(sparsagg::io::parse_double(records[1][1]), 1.5);
}

TEST_F(Cli, FitNonConvergenceExitsTwoWithPartialFit) {
  std::string csv = "x1,x2,y\n";
  for (int i = 0; i < 20; ++i) {
    const double a = 0.05 * i, b = a + 1e-4 * ((i * 7) % 3);
    csv += sparsagg::io::format_double(a) + "," + sparsagg::io::format_double(b) + "," +
           sparsagg::io::format_double(3 * a + (i % 2)) + "\n";
  }
  write("data.csv", csv);
  const Result r = invoke({"fit", "--dict", "coordinate:2", "--data", path("data.csv"), "--out", path("coef.csv"),
                           "--A", "0.0001", "--max-sweeps", "1", "--tol", "1e-14"});
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(fs::exists(path("coef.csv")));
}

TEST_F(Cli, DiagnoseFourierKappaIsOne) {
  const Result r = invoke({"diagnose", "--dict", "fourier:5", "--measure", "uniform"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rep = report(r.out);
  EXPECT_NEAR(std::stod(rep.at("kappa")), 1.0, 1e-6);
  EXPECT_NEAR(std::stod(rep.at("L")), std::sqrt(2.0), 1e-6);
  EXPECT_EQ(rep.at("M"), "5");
}

TEST_F(Cli, DiagnoseWritesGram) {
  const Result r = invoke({"diagnose", "--dict", "fourier:3", "--gram-out", path("gram.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto records = sparsagg::io::read_records(path("gram.csv"));
  ASSERT_EQ(records.size(), 4u);
  EXPECT_EQ(records[0], (std::vector<std::string>{"j1", "j2", "j3"}));
}

TEST_F(Cli, OracleCsv) {
  const Result r = invoke({"oracle", "--dict", "fourier:9", "--truth", "fourier:2:3,4:-2,7:1", "--k", "0:3"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::vector<std::string> got;
  while (std::getline(lines, line)) got.push_back(line);
  ASSERT_EQ(got.size(), 5u);
  EXPECT_EQ(got[0], "k,residual2,support,exact");
  const auto last = sparsagg::io::split_record(got[4]);
  EXPECT_EQ(last[0], "3");
  EXPECT_LT(std::abs(sparsagg::io::parse_double(last[1])), 1e-10);
  EXPECT_EQ(last[2], "2;4;7");
}

TEST_F(Cli, BoundsReport) {
  write("params.txt", "n=1000\nM=10\nc0=1\nL=1.4142135623730951\n");
  const Result r = invoke({"bounds", "--params", path("params.txt"), "--lemma", "L4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(std::stod(report(r.out).at("L4")), 1.6048e-17, 1e-20);
  const Result all = invoke({"bounds", "--params", path("params.txt")});
  ASSERT_EQ(all.code, 0) << all.err;
  EXPECT_EQ(report(all.out).at("L6"), "unavailable");
}

TEST_F(Cli, BoundsMissingParameterIsUsageError) {
  write("params.txt", "n=1000\n");
  EXPECT_EQ(invoke({"bounds", "--params", path("params.txt"), "--lemma", "L4"}).code, 1);
}

TEST_F(Cli, ExperimentAndSummary) {
  write("exp.cfg", "preset=fourier-L0k\nn=128,256,512,1024\nM=9\nk=2\nA=4\nreplicates=30\nseed=3\n");
  const Result e = invoke({"experiment", "--config", path("exp.cfg"), "--out", path("rows.csv"), "--threads", "1"});
  ASSERT_EQ(e.code, 0) << e.err;
  const std::string first = sparsagg::io::read_text(path("rows.csv"));
  EXPECT_EQ(invoke({"experiment", "--config", path("exp.cfg"), "--out", path("rows2.csv"), "--threads", "2"}).code,
            0);
  EXPECT_EQ(first, sparsagg::io::read_text(path("rows2.csv")));
  const Result s = invoke({"summary", "--config", path("exp.cfg"), "--in", path("rows.csv"), "--out",
                           path("summary.csv"), "--slopes", path("slopes.csv"), "--bound-check", path("bound.csv")});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_EQ(sparsagg::io::read_records(path("summary.csv")).size(), 5u);
  const auto slopes = sparsagg::io::read_records(path("slopes.csv"));
  EXPECT_EQ(slopes.size(), 3u);
  EXPECT_TRUE(fs::exists(path("bound.csv")));
}

TEST_F(Cli, ExperimentBadConfigIsUsageError) {
  write("exp.cfg", "preset=fourier-L0k\nn=128\nM=9\nk=2\nA=4\nreplicates=5\n");
  EXPECT_EQ(invoke({"experiment", "--config", path("exp.cfg"), "--out", path("rows.csv")}).code, 1);
  EXPECT_FALSE(fs::exists(path("rows.csv")));
}
