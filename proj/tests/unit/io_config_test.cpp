#include <filesystem>
#include <functional>
#include <sstream>

#include <unistd.h>

#include <gtest/gtest.h>

#include "zsmat/config.hpp"
#include "zsmat/errors.hpp"
#include "zsmat/io.hpp"
#include "zsmat/metrics.hpp"
#include "zsmat/pipeline.hpp"
#include "zsmat/report.hpp"
#include "zsmat/synth.hpp"

namespace fs = std::filesystem;
using namespace zsmat;

namespace {

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

DetectionSequence parse(const std::string& text) {
  std::istringstream in(text);
  return parse_detections(in, "dets.jsonl");
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("zsmat-io-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Detections, EmptyFile) { EXPECT_TRUE(parse("").empty()); }

TEST(Detections, ScoreOutOfRangeNamesLine) {
  const std::string text =
      "{\"frame\":0,\"detections\":[]}\n"
      "{\"frame\":1,\"detections\":[{\"bbox\":[1,2,3,4],\"score\":1.2,\"label\":\"a\"}]}\n";
  EXPECT_THROW(parse(text), ValidationError);
  EXPECT_NE(message_of([&] { parse(text); }).find("dets.jsonl:2"), std::string::npos);
}

TEST(Detections, MalformedRecords) {
  EXPECT_THROW(parse("{\"frame\":0}\n"), ValidationError);
  EXPECT_THROW(parse("not json\n"), ValidationError);
  EXPECT_THROW(parse("{\"frame\":-1,\"detections\":[]}\n"), ValidationError);
  EXPECT_THROW(parse("{\"frame\":0,\"detections\":[{\"bbox\":[1,2,3],\"score\":0.5}]}\n"), ValidationError);
  EXPECT_THROW(parse("{\"frame\":0,\"detections\":[{\"bbox\":[1,2,0,4],\"score\":0.5}]}\n"), ValidationError);
  EXPECT_THROW(parse("{\"frame\":0,\"detections\":[{\"bbox\":[1,2,3,4],\"score\":\"hi\"}]}\n"), ValidationError);
}

TEST(Detections, FramesMustIncrease) {
  const std::string text = "{\"frame\":3,\"detections\":[]}\n{\"frame\":3,\"detections\":[]}\n";
  EXPECT_NE(message_of([&] { parse(text); }).find("dets.jsonl:2"), std::string::npos);
}

TEST(Detections, GapsAreEmptyFrames) {
  const auto d = parse("{\"frame\":2,\"detections\":[{\"bbox\":[1,2,3,4],\"score\":0.5}]}\n");
  ASSERT_EQ(d.size(), 3u);
  EXPECT_TRUE(d[0].empty());
  EXPECT_EQ(d[2][0].bbox, (BBox{1, 2, 3, 4}));
}

TEST(Detections, RoundTripGenerated) {
  const auto s = generate(crowded_scenario(2));
  std::ostringstream out;
  write_detections(out, s.detections);
  EXPECT_EQ(parse(out.str()), s.detections);
}

TEST(Mot, RoundTripGenerated) {
  const auto s = generate(easy_scenario(2));
  std::ostringstream out;
  write_mot(out, s.ground_truth);
  std::istringstream in(out.str());
  EXPECT_EQ(parse_mot(in), s.ground_truth);
  EXPECT_EQ(out.str().substr(0, 2), "1,");
}

TEST(Mot, DuplicatePairRejected) {
  std::istringstream in("1,1,0,0,5,5,1,1,1\n1,1,3,3,5,5,1,1,1\n");
  EXPECT_THROW(parse_mot(in, "gt.txt"), ValidationError);
  std::istringstream zero("0,1,0,0,5,5,1,1,1\n");
  EXPECT_THROW(parse_mot(zero, "gt.txt"), ValidationError);
  std::istringstream shortrow("1,1,0,0,5\n");
  EXPECT_THROW(parse_mot(shortrow, "gt.txt"), ValidationError);
}

TEST(Config, EmptyGivesDefaults) {
  const auto c = parse_config("");
  EXPECT_EQ(c.threshold.delta, 0.1);
  EXPECT_EQ(c.tracker.tau_mask, 0.4);
  EXPECT_EQ(c.tracker.tau_iou, 0.3);
  EXPECT_EQ(c.tracker.tau_reliable, 8.0);
  EXPECT_EQ(c.tracker.tau_pending, 6.0);
  EXPECT_EQ(c.tracker.tau_lost, 2.0);
  EXPECT_EQ(c.tracker.n_lost, 25);
  EXPECT_EQ(c.tracker.n_frames, 10);
  EXPECT_EQ(c.tracker.tau_miou, 0.8);
  EXPECT_EQ(c.tracker.tau_dscore, 2.0);
  EXPECT_EQ(c.tracker.tau_dstd, 0.2);
  EXPECT_EQ(c.tracker.tau_nms, 0.95);
  EXPECT_EQ(c.threshold_mode, ThresholdMode::Adaptive);
  EXPECT_EQ(c.segmenter, "oracle");
}

TEST(Config, OrderingViolationNamesKeys) {
  const auto msg = message_of([] { parse_config("tau_pending = 9\n"); });
  EXPECT_NE(msg.find("tau_pending"), std::string::npos);
  EXPECT_NE(msg.find("tau_reliable"), std::string::npos);
  EXPECT_THROW(parse_config("tau_pending = 9\n"), ConfigError);
}

TEST(Config, DeltaOverlayReachesThreshold) {
  const auto c = parse_config("# comment\ndelta = 0\n");
  EXPECT_EQ(c.threshold.delta, 0.0);
  DetectionSequence d(1);
  for (double s : {0.1, 0.2, 0.8, 0.9}) d[0].push_back(Detection{0, BBox{0, 0, 1, 1}, s, ""});
  EXPECT_DOUBLE_EQ(sequence_threshold("s", d, c).result.tau, 0.5);
  EXPECT_DOUBLE_EQ(sequence_threshold("s", d, RunConfig{}).result.tau, 0.6);
}

TEST(Config, RejectsBadInput) {
  EXPECT_NE(message_of([] { parse_config("tau_mask = 0.4\nbogus = 1\nalso = 2\n"); }).find("bogus, also"),
            std::string::npos);
  EXPECT_THROW(parse_config("delta = 0.1\ndelta = 0.2\n"), ConfigError);
  EXPECT_THROW(parse_config("delta 0.1\n"), ConfigError);
  EXPECT_THROW(parse_config("delta = abc\n"), ConfigError);
  EXPECT_THROW(parse_config("n_lost = 2.5\n"), ConfigError);
  EXPECT_THROW(parse_config("reconstruction = sometimes\n"), ConfigError);
  EXPECT_THROW(parse_config("delta = 1.5\n"), ConfigError);
}

TEST(Config, TextRoundTrip) {
  auto c = parse_config("threshold = fixed\nfixed_threshold = 0.45\ninit_rule = box\nreconstruction = always\n"
                        "cross_object = false\nsequences = a, b\n");
  EXPECT_EQ(c.threshold_mode, ThresholdMode::Fixed);
  EXPECT_EQ(c.tracker.init_rule, InitRule::Box);
  EXPECT_EQ(c.sequences, (std::vector<std::string>{"a", "b"}));
  const auto again = parse_config(config_to_text(c));
  EXPECT_EQ(config_to_text(again), config_to_text(c));
}

TEST(Threshold, SummaryRoundTrip) {
  const auto s = generate(easy_scenario(1));
  const auto t = sequence_threshold("easy", s.detections, RunConfig{});
  const auto back = threshold_summary_from_json(threshold_summary_to_json(t), "t.json");
  EXPECT_EQ(threshold_summary_to_json(back), threshold_summary_to_json(t));
}

TEST(Threshold, ShiftedModesGiveDifferentTaus) {
  auto lo = easy_scenario(1);
  auto hi = easy_scenario(1);
  hi.detector_noise.tp_score_mode.mean = 0.95;
  hi.detector_noise.fp_score_mode.mean = 0.55;
  const double a = sequence_threshold("lo", generate(lo).detections, RunConfig{}).result.tau;
  const double b = sequence_threshold("hi", generate(hi).detections, RunConfig{}).result.tau;
  EXPECT_GT(b, a + 0.1);
}

TEST(Report, ListsMissingFiles) {
  const auto dir = scratch_dir("missing");
  write_file((dir / "s1.threshold.json").string(), "{}");
  const auto msg = message_of([&] { build_report({dir.string(), (dir / "nope").string()}); });
  EXPECT_NE(msg.find("s1.events.jsonl"), std::string::npos);
  EXPECT_NE(msg.find("eval.json"), std::string::npos);
  EXPECT_NE(msg.find("nope"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Report, TablesFromRuns) {
  const auto root = scratch_dir("tables");
  const RunConfig cfg;
  for (const std::string variant : {"adaptive", "fixed"}) {
    RunConfig vc = cfg;
    if (variant == "fixed") vc.threshold_mode = ThresholdMode::Fixed;
    const auto dir = root / variant;
    fs::create_directories(dir);
    EvalRows rows;
    for (int i = 0; i < 2; ++i) {
      auto sc = ablation_suite(3, 2)[static_cast<std::size_t>(i)];
      const auto s = generate(sc);
      const auto run = run_scenario(s, vc);
      write_file((dir / (sc.name + ".threshold.json")).string(), threshold_summary_to_json(run.threshold));
      std::ostringstream ev;
      write_events(ev, run.events);
      write_file((dir / (sc.name + ".events.jsonl")).string(), ev.str());
      rows.emplace_back(sc.name, evaluate(s.ground_truth, run.predictions));
    }
    write_file((dir / "eval.json").string(), eval_to_json(rows));
  }
  const auto t = build_report({(root / "adaptive").string(), (root / "fixed").string()});
  std::istringstream lines(t.thresholds_csv);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[1].rfind("adaptive,ablation-00,adaptive,", 0), 0u);
  EXPECT_EQ(rows[3].rfind("fixed,ablation-00,fixed,0.3,", 0), 0u);
  EXPECT_NE(rows[1], rows[2]);
  std::istringstream ab(t.ablation_csv);
  int n = 0;
  while (std::getline(ab, line)) ++n;
  EXPECT_EQ(n, 3);
  EXPECT_NE(t.histograms_csv.find("adaptive,ablation-01,"), std::string::npos);
  fs::remove_all(root);
}
