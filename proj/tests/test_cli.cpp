#include <gtest/gtest.h>

#include <algorithm>

#include <filesystem>
#include <sstream>

#include "clipmot/cli.hpp"
#include "clipmot/io.hpp"
#include "clipmot/metrics.hpp"

using namespace clipmot;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = 0;
  std::string out, err;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream o, e;
  const int code = run_cli(args, o, e);
  return {code, o.str(), e.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("clipmot_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    io::write_file(dir_ / name, text);
    return path(name);
  }
  std::string simulate(const std::string& cfg_text) {
    const auto cfg = write("scenario.cfg", cfg_text);
    const CliRun r = cli({"simulate", "--config", cfg, "--out-dir", path("sim")});
    EXPECT_EQ(r.code, 0) << r.err;
    return path("sim");
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, SimulateTrackEvalRecoversNoiselessScenario) {
  const std::string sim = simulate("frames = 40\nidentities = 4\nseed = 5\n");
  for (const char* f : {"scenario.json", "det.txt", "emb.txt", "gt.txt", "manifest.json"})
    EXPECT_TRUE(fs::exists(fs::path(sim) / f)) << f;
  const auto cfg = write("pipeline.cfg", "inter = temporal_average\n");
  const CliRun t = cli({"track", "--dets", sim + "/det.txt", "--embs", sim + "/emb.txt", "--config", cfg,
                        "--out", path("pred.txt")});
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_TRUE(fs::exists(path("pred.txt.manifest.json")));
  const EvalReport r = evaluate(io::parse_tracks(sim + "/gt.txt"), io::parse_tracks(path("pred.txt")));
  EXPECT_EQ(r.idf1, 1.0);

  const CliRun e = cli({"eval", "--gt", sim + "/gt.txt", "--pred", path("pred.txt"), "--report", path("r.json")});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_NE(io::read_file(path("r.json")).find("\"idf1\": 1.0"), std::string::npos);
}

TEST_F(Cli, TrackIsDeterministic) {
  const std::string sim = simulate("frames = 30\nembedding_sigma = 0.2\nfp_rate = 0.2\nseed = 2\n");
  const auto cfg = write("pipeline.cfg", "inter = temporal_average\nintra = direction_free\n");
  for (const char* out : {"a.txt", "b.txt"})
    ASSERT_EQ(cli({"track", "--dets", sim + "/det.txt", "--embs", sim + "/emb.txt", "--config", cfg, "--out",
                   path(out)})
                  .code,
              0);
  EXPECT_EQ(io::read_file(path("a.txt")), io::read_file(path("b.txt")));
}

TEST_F(Cli, EvalPredEqualsGt) {
  const std::string sim = simulate("frames = 10\n");
  const CliRun e = cli({"eval", "--gt", sim + "/gt.txt", "--pred", sim + "/gt.txt", "--report", path("r.json")});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_NE(e.out.find("idf1"), std::string::npos);
}

TEST_F(Cli, TrainThenTrackWithClipTracker) {
  const auto scfg = write("s.cfg", "frames = 30\nidentities = 4\nembedding_dim = 8\nmin_separation = 0.9\n");
  const auto tcfg = write("t.cfg", "epochs = 2\nbatches_per_epoch = 2\ntrain_videos = 2\nmodel_dim = 8\n"
                                   "layers = 1\nheads = 2\nff_dim = 16\n");
  const CliRun t = cli({"train", "--scenario-config", scfg, "--train-config", tcfg, "--out-weights",
                        path("w.bin"), "--loss-csv", path("loss.csv"), "--seed", "3"});
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_EQ(io::read_file(path("loss.csv")).rfind("epoch,loss\n1,", 0), 0u);
  EXPECT_TRUE(fs::exists(path("w.bin.manifest.json")));

  const std::string sim = simulate("frames = 20\nidentities = 3\nembedding_dim = 8\nmin_separation = 0.9\n");
  const auto pcfg = write("p.cfg", "inter = clip_tracker\n");
  const CliRun k = cli({"track", "--dets", sim + "/det.txt", "--embs", sim + "/emb.txt", "--config", pcfg,
                        "--weights", path("w.bin"), "--out", path("pred.txt")});
  EXPECT_EQ(k.code, 0) << k.err;
  const CliRun nw = cli({"track", "--dets", sim + "/det.txt", "--embs", sim + "/emb.txt", "--config", pcfg,
                         "--out", path("pred2.txt")});
  EXPECT_EQ(nw.code, 1);
}

TEST_F(Cli, SweepWritesTable) {
  const auto scfg = write("s.cfg", "frames = 30\nembedding_sigma = 0.1\n");
  const auto grid = write("g.cfg", "clips = 10x5 6x3\ninter = iou_chain temporal_average\n");
  const CliRun r = cli({"sweep", "--grid", grid, "--out-table", path("t.csv"), "--scenario-config", scfg});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = io::read_file(path("t.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_EQ(cli({"sweep", "--grid", grid, "--out-table", path("t.csv")}).code, 1);
}

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"frobnicate"}).code, 1);
  const CliRun r = cli({"eval", "--gt", "a.txt", "--pred", "b.txt"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--report"), std::string::npos);
  EXPECT_EQ(cli({"eval", "--gt", "a", "--pred", "b", "--report", "c", "--bogus"}).code, 1);
  EXPECT_EQ(cli({"--version"}).code, 0);
}

TEST_F(Cli, DataErrorsExitTwo) {
  const auto bad = write("bad.txt", "1,1,0,0,1\n");
  EXPECT_EQ(cli({"eval", "--gt", bad, "--pred", bad, "--report", path("r.json")}).code, 2);
  EXPECT_EQ(cli({"eval", "--gt", path("missing.txt"), "--pred", bad, "--report", path("r.json")}).code, 2);
  const auto cfg = write("c.cfg", "no_such_key = 1\n");
  EXPECT_EQ(cli({"simulate", "--config", cfg, "--out-dir", path("x")}).code, 2);
}
