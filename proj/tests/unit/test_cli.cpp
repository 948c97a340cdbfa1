#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  static const fs::path d = [] {
    const fs::path p = fs::temp_directory_path() / ("kwv_cli_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return d;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(KWV_CLI_PATH) + " " + args + " > " + (scratch() / "stdout.txt").string() +
                          " 2> " + (scratch() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

std::string config(const std::string& name) { return std::string(KWV_CONFIG_DIR) + "/" + name + ".json"; }

}  // namespace

TEST(Cli, SolveWritesReport) {
  const fs::path out = scratch() / "solve";
  ASSERT_EQ(run_cli("solve --config " + config("solve_circle") + " --out " + out.string()), 0)
      << slurp(scratch() / "stderr.txt");
  EXPECT_TRUE(fs::exists(out / "solve.csv"));
  EXPECT_TRUE(fs::exists(out / "summary.json"));
  EXPECT_TRUE(fs::exists(out / "config_echo.json"));
}

TEST(Cli, RerunFromEchoIsIdentical) {
  const fs::path a = scratch() / "echo_a", b = scratch() / "echo_b";
  ASSERT_EQ(run_cli("volume --config " + config("volume") + " --out " + a.string()), 0);
  ASSERT_EQ(run_cli("volume --config " + (a / "config_echo.json").string() + " --out " + b.string()), 0);
  EXPECT_EQ(slurp(a / "volume.csv"), slurp(b / "volume.csv"));
  EXPECT_FALSE(slurp(a / "volume.csv").empty());
}

TEST(Cli, ConfigErrorsExitTwo) {
  const auto bad = write_config("unknown_key.json", R"J({"experiment":"volume","volume":{"k":2,"b":1,"r":3},
      "s_list":[10],"colour":"red"})J");
  EXPECT_EQ(run_cli("volume --config " + bad.string()), 2);
  EXPECT_NE(slurp(scratch() / "stderr.txt").find("$.colour"), std::string::npos);
  // subcommand and config disagree
  EXPECT_EQ(run_cli("sweep --config " + config("solve_circle")), 2);
  EXPECT_EQ(run_cli("solve --config " + config("solve_circle") + " --scheme upwind"), 2);
  EXPECT_EQ(run_cli("solve"), 2);
  EXPECT_EQ(run_cli("frobnicate --config x.json"), 2);
  const auto below = write_config("below.json", R"J({"experiment":"vortex","grid":{"kind":"sphere","resolution":16},
      "map":{"components":[[0,1],[1]]},"s_list":[3]})J");
  EXPECT_EQ(run_cli("vortex --config " + below.string()), 2);
  const auto syntax = write_config("syntax.json", R"J({"experiment":"solve","grid":{"kind":"circle","resolution":16},
      "problem":{"h":"-(1 +","c1":1,"c2":1},"s_list":[2]})J");
  EXPECT_EQ(run_cli("solve --config " + syntax.string()), 2);
}

TEST(Cli, NonConvergenceExitsThree) {
  const auto cfg = write_config("tiny_iter.json", R"J({"experiment":"solve","grid":{"kind":"circle","resolution":32},
      "problem":{"h":"-(2+cos(2*pi*x))","c1":0,"c2":1},"s_list":[16],"tolerances":{"max_iter":2}})J");
  EXPECT_EQ(run_cli("solve --config " + cfg.string() + " --out " + (scratch() / "tiny").string()), 3);
}

TEST(Cli, IoErrorsExitFour) {
  const fs::path file = scratch() / "a_file";
  std::ofstream(file) << "x";
  EXPECT_EQ(run_cli("volume --config " + config("volume") + " --out " + (file / "sub").string()), 4);
  EXPECT_EQ(run_cli("volume --config " + (scratch() / "missing.json").string()), 4);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run_cli("--help"), 0); }
