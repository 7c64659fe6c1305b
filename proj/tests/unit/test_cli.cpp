#ifdef PTREE_HAVE_CLI
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ptree-eco");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = ptree::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

struct Workspace {
  fs::path dir = fs::temp_directory_path() / "ptree_cli_test";
  Workspace() {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return dir / name;
  }
};

}  // namespace

TEST(Cli, VersionAndHelpExitZero) {
  EXPECT_EQ(cli({"--version"}).code, 0);
  auto h = cli({"--help"});
  EXPECT_EQ(h.code, 0);
  EXPECT_NE(h.out.find("simulate"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"fit"}).code, 2);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
  auto r = cli({"fit", "--config", "/nonexistent.cfg"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("nonexistent.cfg"), std::string::npos);
}

TEST(Cli, BadConfigExitsTwo) {
  Workspace ws;
  auto cfg = ws.write("bad.cfg", "model = CJS\noccasions = 3\nunknown_key = 1\n");
  auto r = cli({"fit", "--config", cfg.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("unknown_key"), std::string::npos);
}

TEST(Cli, BadDataExitsThree) {
  Workspace ws;
  ws.write("h.csv", "1,0,1\n0,7,0\n");
  auto cfg = ws.write("c.cfg", "model = CJS\noccasions = 3\nhistories = h.csv\niterations = 100\nburn_in = 10\n");
  auto r = cli({"fit", "--config", cfg.string(), "--out", (ws.dir / "out").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("h.csv:2:2"), std::string::npos) << r.err;
}

TEST(Cli, SimulateFitDiagnosePlotPipeline) {
  Workspace ws;
  auto cfg = ws.write("sim.cfg",
                      "model = CJS\noccasions = 4\nconstraint = age\ntruth_phi = 0.8, 0.7, 0.6\ntruth_p = 0.5\n"
                      "truth_releases = 100, 50, 50, 0\niterations = 600\nburn_in = 200\nchains = 2\n");
  auto sim = cli({"simulate", "--config", cfg.string(), "--seed", "3", "--out", (ws.dir / "sim").string()});
  ASSERT_EQ(sim.code, 0) << sim.err;
  ASSERT_TRUE(fs::exists(ws.dir / "sim" / "fit.cfg"));
  auto fit = cli({"fit", "--config", (ws.dir / "sim" / "fit.cfg").string(), "--threads", "2", "--out",
                  (ws.dir / "fit").string()});
  ASSERT_EQ(fit.code, 0) << fit.err;
  EXPECT_NE(fit.out.find("phi[1]"), std::string::npos);
  EXPECT_NE(fit.out.find("rhat"), std::string::npos);
  auto traces = (ws.dir / "fit" / "traces.csv").string();
  auto diag = cli({"diagnose", "--traces", traces, "--out", (ws.dir / "diag").string()});
  EXPECT_EQ(diag.code, 0) << diag.err;
  EXPECT_TRUE(fs::exists(ws.dir / "diag" / "summary.json"));
  auto plot = cli({"emit-plot-data", "--config", (ws.dir / "sim" / "fit.cfg").string(), "--traces", traces, "--out",
                   (ws.dir / "plot").string()});
  EXPECT_EQ(plot.code, 0) << plot.err;
  EXPECT_EQ(cli({"diagnose", "--traces", (ws.dir / "missing.csv").string()}).code, 3);
}
#endif
