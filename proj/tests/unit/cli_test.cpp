#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(ZSMAT_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("zsmat-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()) + "-" +
            std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string p(const std::string& rel) const { return (dir_ / rel).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, SynthTrackEval) {
  ASSERT_EQ(run("synth --preset easy --seed 3 --out " + p("w")), 0);
  ASSERT_TRUE(fs::exists(p("w/gt/easy.txt")));
  ASSERT_TRUE(fs::exists(p("w/det/easy.jsonl")));
  ASSERT_TRUE(fs::exists(p("w/scenario/easy.json")));
  ASSERT_EQ(run("track --detections " + p("w/det/easy.jsonl") + " --scenario " + p("w/scenario/easy.json") +
                " --out " + p("r/easy.txt")),
            0);
  EXPECT_TRUE(fs::exists(p("r/easy.events.jsonl")));
  EXPECT_TRUE(fs::exists(p("r/easy.threshold.json")));
  ASSERT_EQ(run("eval --gt " + p("w/gt") + " --pred " + p("r") + " --out " + p("eval")), 0);
  const auto table = slurp(p("eval.txt"));
  EXPECT_NE(table.find("HOTA"), std::string::npos);
  EXPECT_NE(table.find("COMBINED"), std::string::npos);
  EXPECT_TRUE(fs::exists(p("eval.json")));
  ASSERT_EQ(run("threshold --detections " + p("w/det/easy.jsonl") + " --out " + p("t.json")), 0);
  EXPECT_NE(slurp(p("t.json")).find("tau"), std::string::npos);
}

TEST_F(Cli, Deterministic) {
  ASSERT_EQ(run("synth --preset crowded --seed 8 --out " + p("w")), 0);
  for (const char* r : {"a", "b"}) {
    ASSERT_EQ(run("track --detections " + p("w/det/crowded.jsonl") + " --scenario " + p("w/scenario/crowded.json") +
                  " --out " + p(std::string(r) + "/crowded.txt")),
              0);
  }
  EXPECT_EQ(slurp(p("a/crowded.txt")), slurp(p("b/crowded.txt")));
  EXPECT_EQ(slurp(p("a/crowded.events.jsonl")), slurp(p("b/crowded.events.jsonl")));
  EXPECT_FALSE(slurp(p("a/crowded.events.jsonl")).empty());
}

TEST_F(Cli, ExternalOracleMatchesInProcess) {
  ASSERT_EQ(run("synth --preset crossing --seed 2 --out " + p("w")), 0);
  const std::string common = "track --detections " + p("w/det/crossing.jsonl") + " --scenario " +
                             p("w/scenario/crossing.json");
  ASSERT_EQ(run(common + " --out " + p("in/crossing.txt")), 0);
  const std::string server = std::string(ZSMAT_CLI) + " serve-oracle --scenario " + p("w/scenario/crossing.json");
  ASSERT_EQ(run(common + " --segmenter 'exec:" + server + "' --out " + p("ex/crossing.txt")), 0);
  EXPECT_EQ(slurp(p("in/crossing.txt")), slurp(p("ex/crossing.txt")));
  EXPECT_EQ(slurp(p("in/crossing.events.jsonl")), slurp(p("ex/crossing.events.jsonl")));
}

TEST_F(Cli, ExitCodes) {
  ASSERT_EQ(run("synth --preset easy --seed 1 --out " + p("w")), 0);
  {
    std::ofstream(p("bad.cfg")) << "tau_pending = 9\n";
  }
  EXPECT_EQ(run("track --detections " + p("w/det/easy.jsonl") + " --scenario " + p("w/scenario/easy.json") +
                " --config " + p("bad.cfg") + " --out " + p("r/easy.txt")),
            1);
  {
    std::ofstream(p("bad.jsonl")) << "{\"frame\":0,\"detections\":[{\"bbox\":[1,1,4,4],\"score\":1.5}]}\n";
  }
  EXPECT_EQ(run("threshold --detections " + p("bad.jsonl")), 1);
  EXPECT_EQ(run("track --detections " + p("w/det/easy.jsonl") + " --segmenter exec:false --width 320 --height 240" +
                " --out " + p("r2/easy.txt")),
            2);
  EXPECT_EQ(run("synth --preset nope --out " + p("x")), 1);
  EXPECT_EQ(run("frobnicate"), 1);
}

TEST_F(Cli, Conformance) {
  EXPECT_EQ(run("conformance"), 0);
  const std::string server = std::string(ZSMAT_CLI) + " serve-oracle --preset crossing";
  EXPECT_EQ(run("conformance --width 320 --height 240 --segmenter 'exec:" + server + "'"), 0);
}
