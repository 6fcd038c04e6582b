#include <charconv>
#include <numbers>
#include <sys/wait.h>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cprlab/cli/commands.hpp"

using namespace cprlab;
using namespace cprlab::cli;

namespace {

struct Result {
  int status;
  std::string out, err;
};

Result run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int status = run(args, out, err);
  return {status, out.str(), err.str()};
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

/// Data rows (non-comment lines after the column header).
std::vector<std::vector<std::string>> rows(const std::string& csv) {
  std::vector<std::vector<std::string>> out;
  std::stringstream ss(csv);
  std::string line;
  bool header_seen = false;
  while (std::getline(ss, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    out.push_back(split(line, ','));
  }
  return out;
}

std::string header_value(const std::string& csv, const std::string& key) {
  std::stringstream ss(csv);
  std::string line;
  const std::string prefix = "# " + key;
  while (std::getline(ss, line))
    if (line.rfind(prefix, 0) == 0) {
      const auto rest = line.substr(prefix.size());
      return rest.substr(rest.find_first_not_of(":= "));
    }
  return {};
}

double number(const std::string& s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  EXPECT_EQ(ec, std::errc{}) << s;
  EXPECT_EQ(p, s.data() + s.size()) << s;
  return v;
}

std::string temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("cprlab_test_" + name);
  std::ofstream(path) << content;
  return path.string();
}

}  // namespace

TEST(FloorCommand, SingleRow) {
  const auto r = run_cli({"floor", "--algorithm", "vv", "--order", "8", "--block-length", "11", "--sigma2", "0.01"});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto data = rows(r.out);
  ASSERT_EQ(data.size(), 1u);
  ASSERT_EQ(data[0].size(), 5u);
  EXPECT_EQ(data[0][0], "vv");
  EXPECT_EQ(data[0][1], "8");
  EXPECT_EQ(number(data[0][2]), 0.01);
  EXPECT_EQ(data[0][3], "11");
  EXPECT_NEAR(number(data[0][4]), 1.27025813134808661e-5, 1e-12 * 1.27025813134808661e-5);
  EXPECT_NE(r.out.find("algorithm,n,sigma2_total,block_length,ber_floor"), std::string::npos);
  EXPECT_EQ(r.out.rfind("# cprlab ", 0), 0u);
}

TEST(FloorCommand, EvenVvBlockLengthIsRejected) {
  const auto r = run_cli({"floor", "--algorithm", "vv", "--block-length", "10", "--sigma2", "0.01"});
  EXPECT_EQ(r.status, 2);
  EXPECT_TRUE(r.out.empty());
  EXPECT_NE(r.err.find("N_VV must be odd"), std::string::npos) << r.err;
}

TEST(FloorCommand, LinewidthPresetHasOneSeriesPerOrder) {
  const auto r = run_cli({"floor", "--preset", "fig12"});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto data = rows(r.out);
  ASSERT_EQ(data.size(), 400u);
  for (std::size_t s = 0; s < 4; ++s) {
    EXPECT_EQ(data[s * 100][1], std::to_string(4u << s));
    EXPECT_EQ(data[s * 100][0], "vv");
  }
  EXPECT_EQ(header_value(r.out, "axis"), "linewidth_hz");
  EXPECT_EQ(header_value(r.out, "series"), "4");
  EXPECT_EQ(header_value(r.out, "rows_per_series"), "100");
}

TEST(FloorCommand, NlmsIgnoresBlockLength) {
  const auto r = run_cli({"floor", "--algorithm", "nlms", "--order", "8", "--block-length", "3,5", "--sigma2", "0.01"});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto data = rows(r.out);
  ASSERT_EQ(data.size(), 1u);
  EXPECT_EQ(data[0][3], "");
  EXPECT_NEAR(number(data[0][4]), floor_nlms(8, 0.01), 1e-15);
}

TEST(FloorCommand, HeaderCommandReproducesOutput) {
  const auto first = run_cli({"floor", "--algorithm", "bwa,vv", "--order", "8,16", "--sigma2", "0.01:0.03:0.01"});
  ASSERT_EQ(first.status, 0) << first.err;
  const auto command = header_value(first.out, "command");
  auto args = split(command, ' ');
  ASSERT_EQ(args.front(), "cprlab");
  args.erase(args.begin());
  const auto second = run_cli(args);
  ASSERT_EQ(second.status, 0) << second.err;
  EXPECT_EQ(first.out, second.out);
}

TEST(FloorCommand, NoVarianceIsAnError) {
  const auto r = run_cli({"floor", "--algorithm", "vv"});
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("no phase-noise specification"), std::string::npos);
}

TEST(FloorCommand, ConflictingVarianceFlags) {
  const auto r = run_cli({"floor", "--sigma2", "0.01", "--linewidth", "1"});
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("conflicting"), std::string::npos);
  EXPECT_TRUE(r.out.empty());
}

TEST(FloorCommand, DistanceSweepNeedsLinewidth) {
  const auto r = run_cli({"floor", "--distance", "0:1000:100"});
  EXPECT_EQ(r.status, 2);
  const auto ok = run_cli({"floor", "--distance", "0:1000:100", "--linewidth", "1"});
  ASSERT_EQ(ok.status, 0) << ok.err;
  EXPECT_EQ(rows(ok.out).size(), 11u);
  EXPECT_EQ(header_value(ok.out, "axis"), "distance_km");
}

TEST(FloorCommand, PresetWithScenarioFlagsIsAnError) {
  EXPECT_EQ(run_cli({"floor", "--preset", "fig5", "--order", "8"}).status, 2);
  const auto r = run_cli({"floor", "--preset", "nope"});
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("fig14b"), std::string::npos);
}

TEST(SimulateCommand, ByteIdenticalForSameSeed) {
  const std::vector<std::string> args{"simulate", "--algorithm", "vv", "--order", "8", "--sigma2", "0.04,0.05",
                                      "--symbols", "20000", "--seed", "7"};
  const auto a = run_cli(args);
  const auto b = run_cli(args);
  ASSERT_EQ(a.status, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  auto other = args;
  other.back() = "8";
  EXPECT_NE(run_cli(other).out, a.out);
}

TEST(SimulateCommand, ColumnsAndLinkFields) {
  const auto r = run_cli({"simulate", "--algorithm", "nlms", "--order", "4", "--mu", "1", "--linewidth", "20",
                          "--distance", "100", "--symbols", "10000", "--seed", "3"});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto data = rows(r.out);
  ASSERT_EQ(data.size(), 1u);
  ASSERT_EQ(data[0].size(), 20u);
  EXPECT_EQ(data[0][0], "nlms");
  EXPECT_EQ(number(data[0][3]), 1.0);
  EXPECT_EQ(number(data[0][5]), 20e6);
  EXPECT_EQ(number(data[0][6]), 20e6);
  EXPECT_EQ(number(data[0][7]), 32e9);
  EXPECT_EQ(number(data[0][8]), 100.0);
  EXPECT_EQ(data[0][9], "differential");
  EXPECT_EQ(data[0][10], "variance-equivalent");
  EXPECT_EQ(data[0][17], "3");
  // About 1e-16 at this variance: far beyond plain sampling, so the
  // automatic choice is importance sampling.
  EXPECT_EQ(data[0][19], "importance");
}

TEST(SimulateCommand, AnalyticModeLeavesMonteCarloColumnsEmpty) {
  const auto r = run_cli({"simulate", "--preset", "fig14b", "--mode", "analytic"});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto data = rows(r.out);
  ASSERT_EQ(data.size(), 300u);
  const auto reference = rows(run_cli({"floor", "--preset", "fig14b"}).out);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t col : {9u, 10u, 12u, 13u, 14u, 15u, 16u, 17u, 18u, 19u}) EXPECT_EQ(data[i][col], "") << col;
    EXPECT_EQ(data[i][11], reference[i][4]);
  }
}

TEST(SimulateCommand, TooFewSymbols) {
  const auto r = run_cli({"simulate", "--sigma2", "0.01", "--symbols", "5000"});
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("10^4"), std::string::npos);
  EXPECT_TRUE(r.out.empty());
}

TEST(SimulateCommand, LowSnrIsRejected) {
  EXPECT_EQ(run_cli({"simulate", "--sigma2", "0.01", "--symbols", "10000", "--snr", "20"}).status, 2);
}

TEST(Config, EmptyFileKeepsDefaults) {
  std::istringstream in("");
  const auto c = load_config(in);
  EXPECT_EQ(c.algorithm, "vv");
  EXPECT_EQ(c.order, "4");
  EXPECT_EQ(c.seed, 1u);
  EXPECT_EQ(c.baud_gbaud, 32.0);
  EXPECT_EQ(c.mode, Mode::both);
  EXPECT_FALSE(c.sigma2);
}

TEST(Config, FlagsOverrideFile) {
  const auto path = temp_file("override.ini", "[cpr]\nalgorithm = bwa\norder = 8\n[sweep]\nsigma2 = 0.01\n");
  const auto r = run_cli({"floor", "--config", path, "--order", "16"});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto data = rows(r.out);
  ASSERT_EQ(data.size(), 1u);
  EXPECT_EQ(data[0][0], "bwa");
  EXPECT_EQ(data[0][1], "16");
  std::filesystem::remove(path);
}

TEST(Config, EvenVvBlockLengthRejected) {
  std::istringstream in("[cpr]\nblock_length_vv = 4\n");
  try {
    load_config(in);
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("N_VV must be odd"), std::string::npos) << e.what();
  }
}

TEST(Config, UnknownKeyIsNamed) {
  std::istringstream in("[cpr]\nblocklength = 11\n");
  try {
    load_config(in);
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("cpr.blocklength"), std::string::npos);
  }
  std::istringstream bad_section("[laser]\nlinewidth = 1\n");
  EXPECT_THROW(load_config(bad_section), UsageError);
}

TEST(Config, SampleConfigLoads) {
  const auto path = temp_file("sample.ini",
                              "[cpr]\nalgorithm = nlms,bwa,vv\norder = 8\nblock_length = 11\n"
                              "[sweep]\nsigma2 = 0.001:0.1:0.001\nmode = analytic\n"
                              "[mc]\nseed = 7\nsymbols = 1e6\n");
  const auto r = run_cli({"floor", "--config", path});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(rows(r.out).size(), 300u);
  std::filesystem::remove(path);
}

TEST(LinkCommand, ZeroLinewidthGivesZeroLaserVariance) {
  const auto r = run_cli({"link", "--linewidth", "0", "--distance", "0"});
  ASSERT_EQ(r.status, 0) << r.err;
  for (const char* key : {"sigma2_laser", "sigma2_eepn", "sigma2_total", "effective_linewidth"}) {
    const auto pos = r.out.find(key);
    ASSERT_NE(pos, std::string::npos) << key;
    std::stringstream line(r.out.substr(pos));
    std::string k, v;
    line >> k >> v;
    EXPECT_EQ(number(v), 0.0) << key;
  }
}

TEST(LinkCommand, CrossoverFootnote) {
  const auto r = run_cli({"link", "--linewidth", "1", "--distance", "1000"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("60.69 km"), std::string::npos);
  EXPECT_NE(r.out.find("57.35 km"), std::string::npos);
  EXPECT_NE(r.out.find("[1]"), std::string::npos);
}

TEST(LinkCommand, EffectiveLinewidthRoundTrip) {
  const auto r = run_cli({"link", "--tx-linewidth", "2", "--lo-linewidth", "3", "--distance", "750"});
  ASSERT_EQ(r.status, 0) << r.err;
  auto value = [&](const std::string& key) {
    std::stringstream line(r.out.substr(r.out.find(key + " ")));
    std::string k, v;
    line >> k >> v;
    return number(v);
  };
  const double total = value("sigma2_total");
  const double eff = value("effective_linewidth");
  EXPECT_NEAR(2 * std::numbers::pi * eff / 32e9, total, 1e-15 * total);
  EXPECT_NEAR(value("sigma2_laser"), 2 * std::numbers::pi * 5e6 / 32e9, 1e-17);
}

TEST(LinkCommand, MissingArguments) {
  EXPECT_EQ(run_cli({"link", "--distance", "10"}).status, 2);
  EXPECT_EQ(run_cli({"link", "--linewidth", "1"}).status, 2);
  EXPECT_EQ(run_cli({"link", "--tx-linewidth", "1", "--distance", "10"}).status, 2);
}

TEST(Presets, ListsEveryPreset) {
  const auto r = run_cli({"presets"});
  ASSERT_EQ(r.status, 0);
  for (const auto& name : preset_names()) EXPECT_NE(r.out.find(name), std::string::npos);
}

TEST(ExitCodes, UsageAndSuccess) {
  EXPECT_EQ(run_cli({}).status, 2);
  EXPECT_EQ(run_cli({"bogus"}).status, 2);
  EXPECT_EQ(run_cli({"floor", "--sigma2", "abc"}).status, 2);
  EXPECT_EQ(run_cli({"--version"}).status, 0);
  EXPECT_EQ(run_cli({"floor", "--help"}).status, 0);
}

TEST(ExitCodes, ToolBinary) {
  const std::string tool = CPRLAB_TOOL_PATH;
  const auto out = (std::filesystem::temp_directory_path() / "cprlab_tool_out.csv").string();
  EXPECT_EQ(std::system((tool + " floor --sigma2 0.01 --out " + out + " > /dev/null 2>&1").c_str()), 0);
  std::ifstream f(out);
  std::string first;
  std::getline(f, first);
  EXPECT_EQ(first.rfind("# cprlab", 0), 0u);
  std::filesystem::remove(out);
  const int status = std::system((tool + " floor --block-length 10 --sigma2 0.01 > /dev/null 2>&1").c_str());
  EXPECT_NE(status, 0);
  EXPECT_EQ(WEXITSTATUS(status), 2);
}
