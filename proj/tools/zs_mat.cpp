// zs-mat: synthetic data, thresholds, tracking, evaluation and reports.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "zsmat/config.hpp"
#include "zsmat/conformance.hpp"
#include "zsmat/errors.hpp"
#include "zsmat/io.hpp"
#include "zsmat/metrics.hpp"
#include "zsmat/oracle.hpp"
#include "zsmat/pipeline.hpp"
#include "zsmat/report.hpp"
#include "zsmat/synth.hpp"
#include "zsmat/transport.hpp"

namespace fs = std::filesystem;
using namespace zsmat;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitAbort = 2;

RunConfig config_from(const std::string& path) { return path.empty() ? RunConfig{} : load_config(path); }

std::vector<ScenarioConfig> scenarios_for(const std::string& preset, const std::string& scenario_file,
                                          std::uint64_t seed) {
  if (!scenario_file.empty()) {
    return {scenario_from_json(read_file(scenario_file))};
  }
  if (preset == "ablation") {
    return ablation_suite(seed);
  }
  return {preset_scenario(preset, seed)};
}

void write_mot_file(const fs::path& path, const TrackTable& table) {
  std::ostringstream ss;
  write_mot(ss, table);
  write_file(path.string(), ss.str());
}

void write_scenario(const fs::path& out, const Scenario& s) {
  const auto& name = s.world.config.name;
  fs::create_directories(out / "gt");
  fs::create_directories(out / "det");
  fs::create_directories(out / "scenario");
  write_mot_file(out / "gt" / (name + ".txt"), s.ground_truth);
  std::ostringstream det;
  write_detections(det, s.detections);
  write_file((out / "det" / (name + ".jsonl")).string(), det.str());
  write_file((out / "scenario" / (name + ".json")).string(), scenario_to_json(s.world.config) + "\n");
}

// Writes <dir>/<seq>.txt, .events.jsonl and .threshold.json.
void write_run(const fs::path& results_file, const SequenceRun& run) {
  if (results_file.has_parent_path()) {
    fs::create_directories(results_file.parent_path());
  }
  write_mot_file(results_file, run.predictions);
  fs::path stem = results_file;
  stem.replace_extension();
  std::ostringstream ev;
  write_events(ev, run.events);
  write_file(stem.string() + ".events.jsonl", ev.str());
  write_file(stem.string() + ".threshold.json", threshold_summary_to_json(run.threshold) + "\n");
}

EvalRows evaluate_dirs(const fs::path& gt, const fs::path& pred) {
  EvalRows rows;
  auto eval_one = [&](const std::string& name, const fs::path& g, const fs::path& p) {
    const TrackTable gt_table = load_mot(g.string());
    const TrackTable pred_table = fs::exists(p) ? load_mot(p.string()) : TrackTable{};
    rows.emplace_back(name, evaluate(gt_table, pred_table));
  };
  if (fs::is_regular_file(gt)) {
    eval_one(gt.stem().string(), gt, pred);
    return rows;
  }
  if (!fs::is_directory(gt)) {
    throw ValidationError(fmt::format("ground truth '{}' is neither a file nor a directory", gt.string()));
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(gt)) {
    if (e.is_regular_file() && e.path().extension() == ".txt") {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw ValidationError(fmt::format("no ground-truth .txt files in '{}'", gt.string()));
  }
  for (const auto& f : files) {
    eval_one(f.stem().string(), f, pred / f.filename());
  }
  return rows;
}

void write_eval(const fs::path& out, const EvalRows& rows) {
  if (out.has_parent_path()) {
    fs::create_directories(out.parent_path());
  }
  write_file(out.string() + ".txt", eval_table_text(rows));
  write_file(out.string() + ".json", eval_to_json(rows) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zs-mat: zero-shot multi-animal tracking engine"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::string config_path;
  std::string out;
  std::string preset = "easy";
  std::string scenario_file;

  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic world (GT, detections, scenario echo)");
  synth->add_option("--preset", preset, "easy | crossing | crowded | ablation | ablation-N")->capture_default_str();
  synth->add_option("--scenario", scenario_file, "Scenario JSON instead of a preset");
  synth->add_option("--seed", seed)->capture_default_str();
  synth->add_option("--out", out, "Output directory")->required();

  std::string detections_path;
  int bins = 20;
  auto* threshold = app.add_subcommand("threshold", "Compute the adaptive score threshold of a detections file");
  threshold->add_option("--detections", detections_path)->required()->check(CLI::ExistingFile);
  threshold->add_option("--config", config_path)->check(CLI::ExistingFile);
  threshold->add_option("--bins", bins, "Histogram bins")->capture_default_str()->check(CLI::Range(1, 100000));
  threshold->add_option("--out", out, "Threshold summary JSON");

  std::string segmenter;
  std::string sequence;
  int width = 0;
  int height = 0;
  int frames = 0;
  auto* track = app.add_subcommand("track", "Track one sequence");
  track->add_option("--detections", detections_path)->required()->check(CLI::ExistingFile);
  track->add_option("--segmenter", segmenter, "oracle | exec:CMD | tcp:HOST:PORT (default: config)");
  track->add_option("--config", config_path)->check(CLI::ExistingFile);
  track->add_option("--scenario", scenario_file, "Scenario JSON backing the oracle segmenter")->check(CLI::ExistingFile);
  track->add_option("--sequence", sequence, "Sequence id (default: results file stem)");
  track->add_option("--width", width, "Frame width for external segmenters");
  track->add_option("--height", height, "Frame height for external segmenters");
  track->add_option("--frames", frames, "Frame count (default: scenario or detections)");
  track->add_option("--out", out, "Results CSV; events and threshold files are written beside it")->required();

  std::string gt_path;
  std::string pred_path;
  auto* eval = app.add_subcommand("eval", "Evaluate MOTChallenge results against ground truth");
  eval->add_option("--gt", gt_path, "GT file or directory")->required()->check(CLI::ExistingPath);
  eval->add_option("--pred", pred_path, "Results file or directory")->required();
  eval->add_option("--out", out, "Report prefix; writes <out>.txt and <out>.json");

  std::vector<std::string> result_dirs;
  auto* report = app.add_subcommand("report", "Histogram and ablation tables from results directories");
  report->add_option("--results", result_dirs, "Results directory per variant")->required();
  report->add_option("--out", out, "Output directory")->required();

  auto* ablation = app.add_subcommand("ablation", "Run the seeded ablation suite and crowded reconstruction study");
  ablation->add_option("--seed", seed)->capture_default_str();
  ablation->add_option("--config", config_path)->check(CLI::ExistingFile);
  ablation->add_option("--out", out, "Output directory")->required();

  int tcp_port = -1;
  auto* serve = app.add_subcommand("serve-oracle", "Serve the oracle segmenter over stdio or TCP");
  serve->add_option("--preset", preset)->capture_default_str();
  serve->add_option("--scenario", scenario_file)->check(CLI::ExistingFile);
  serve->add_option("--seed", seed)->capture_default_str();
  serve->add_option("--tcp", tcp_port, "Listen on this port (0 = any) instead of stdio");

  std::string endpoint;
  ConformanceOptions conf_opts;
  auto* conformance = app.add_subcommand("conformance", "Run the protocol transcript suite against a segmenter");
  conformance->add_option("--segmenter", endpoint, "exec:CMD | tcp:HOST:PORT (default: in-process oracle)");
  conformance->add_option("--seed", conf_opts.seed)->capture_default_str();
  conformance->add_option("--width", conf_opts.width)->capture_default_str()->check(CLI::PositiveNumber);
  conformance->add_option("--height", conf_opts.height)->capture_default_str()->check(CLI::PositiveNumber);
  conformance->add_option("--frames", conf_opts.frames)->capture_default_str()->check(CLI::Range(6, 100000));
  conformance->add_option("--fuzz-steps", conf_opts.fuzz_steps)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*synth) {
      for (const auto& cfg : scenarios_for(preset, scenario_file, seed)) {
        const Scenario s = generate(cfg);
        write_scenario(out, s);
        std::cout << fmt::format("{}: {} frames, {} GT rows, {} detections\n", cfg.name, cfg.frames,
                                 s.ground_truth.size(), pooled_scores(s.detections).size());
      }
    } else if (*threshold) {
      const RunConfig cfg = config_from(config_path);
      const auto dets = load_detections(detections_path);
      const auto summary = sequence_threshold(fs::path(detections_path).stem().string(), dets, cfg, bins);
      std::cout << fmt::format("tau = {:.6f} ({}; {} scores admitted)\n", summary.result.tau,
                               summary.adaptive ? (summary.result.clustered ? "clustered" : "fallback") : "fixed",
                               summary.result.admitted);
      if (!out.empty()) {
        write_file(out, threshold_summary_to_json(summary) + "\n");
      }
    } else if (*track) {
      RunConfig cfg = config_from(config_path);
      if (!segmenter.empty()) {
        cfg.segmenter = segmenter;
      }
      const auto dets = load_detections(detections_path);
      std::shared_ptr<const World> world;
      SequenceInfo info{sequence.empty() ? fs::path(out).stem().string() : sequence, width, height, frames};
      if (!scenario_file.empty()) {
        const ScenarioConfig sc = scenario_from_json(read_file(scenario_file));
        world = std::make_shared<const World>(build_world(sc));
        info.width = info.width > 0 ? info.width : sc.width;
        info.height = info.height > 0 ? info.height : sc.height;
        info.frames = info.frames > 0 ? info.frames : sc.frames;
      }
      if (info.frames <= 0) {
        info.frames = static_cast<int>(dets.size());
      }
      if (info.width <= 0 || info.height <= 0) {
        throw ValidationError("frame size unknown: pass --scenario or --width/--height");
      }
      auto session = make_session(cfg.segmenter, world);
      const SequenceRun run = run_sequence(info, dets, *session, cfg);
      write_run(out, run);
      std::cout << fmt::format("{}: tau {:.4f}, {} result rows, {} events\n", info.sequence_id,
                               run.threshold.result.tau, run.predictions.size(), run.events.size());
    } else if (*eval) {
      const EvalRows rows = evaluate_dirs(gt_path, pred_path);
      std::cout << eval_table_text(rows);
      if (!out.empty()) {
        write_eval(out, rows);
      }
    } else if (*report) {
      const ReportTables t = build_report(result_dirs);
      fs::create_directories(out);
      write_file((fs::path(out) / "histograms.csv").string(), t.histograms_csv);
      write_file((fs::path(out) / "thresholds.csv").string(), t.thresholds_csv);
      write_file((fs::path(out) / "ablation.csv").string(), t.ablation_csv);
      std::cout << t.ablation_csv;
    } else if (*ablation) {
      const RunConfig base = config_from(config_path);
      struct Variant {
        std::string name;
        RunConfig cfg;
        bool crowded;
      };
      std::vector<Variant> variants;
      variants.push_back({"adaptive", base, false});
      RunConfig fixed = base;
      fixed.threshold_mode = ThresholdMode::Fixed;
      variants.push_back({"fixed", fixed, false});
      RunConfig box = base;
      box.tracker.init_rule = InitRule::Box;
      variants.push_back({"box_init", box, false});
      RunConfig density = base;
      density.tracker.reconstruction = ReconstructionMode::DensityAware;
      variants.push_back({"crowded_density_aware", density, true});
      RunConfig always = base;
      always.tracker.reconstruction = ReconstructionMode::Always;
      variants.push_back({"crowded_always", always, true});

      std::vector<Scenario> suite;
      for (const auto& c : ablation_suite(seed)) {
        suite.push_back(generate(c));
      }
      const Scenario crowded = generate(crowded_scenario(seed));
      std::vector<const Scenario*> suite_all;
      for (const auto& x : suite) {
        suite_all.push_back(&x);
      }
      const std::vector<const Scenario*> crowded_only{&crowded};
      std::vector<std::string> dirs;
      for (const auto& v : variants) {
        const fs::path dir = fs::path(out) / v.name;
        fs::create_directories(dir);
        EvalRows rows;
        for (const Scenario* s : v.crowded ? crowded_only : suite_all) {
          const SequenceRun run = run_scenario(*s, v.cfg);
          write_run(dir / (s->world.config.name + ".txt"), run);
          rows.emplace_back(s->world.config.name, evaluate(s->ground_truth, run.predictions));
        }
        write_eval(dir / "eval", rows);
        dirs.push_back(dir.string());
      }
      const ReportTables t = build_report(dirs);
      write_file((fs::path(out) / "histograms.csv").string(), t.histograms_csv);
      write_file((fs::path(out) / "thresholds.csv").string(), t.thresholds_csv);
      write_file((fs::path(out) / "ablation.csv").string(), t.ablation_csv);
      std::cout << t.ablation_csv;
    } else if (*serve) {
      const auto cfgs = scenarios_for(preset, scenario_file, seed);
      auto world = std::make_shared<const World>(build_world(cfgs.front()));
      SegmenterServer server([world] { return make_oracle_session(world); });
      if (tcp_port >= 0) {
        TcpListener listener(tcp_port);
        std::cerr << fmt::format("listening on port {}\n", listener.port());
        listener.serve_one(server);
      } else {
        serve_stream(server, std::cin, std::cout);
      }
    } else if (*conformance) {
      std::unique_ptr<LineTransport> transport;
      std::unique_ptr<SegmenterServer> server;
      if (endpoint.empty()) {
        // One static object in a world of the transcript's size.
        ScenarioConfig blank;
        blank.name = conf_opts.sequence_id;
        blank.width = conf_opts.width;
        blank.height = conf_opts.height;
        blank.frames = conf_opts.frames;
        ObjectSpec obj;
        obj.width = conf_opts.width * 0.4;
        obj.height = conf_opts.height * 0.4;
        obj.trajectory.x0 = conf_opts.width * 0.5;
        obj.trajectory.y0 = conf_opts.height * 0.5;
        obj.exit_frame = conf_opts.frames;
        blank.objects.push_back(obj);
        auto world = std::make_shared<const World>(build_world(blank));
        server = std::make_unique<SegmenterServer>([world] { return make_oracle_session(world); });
        transport = std::make_unique<InProcessTransport>(*server);
      } else {
        transport = make_transport(endpoint);
      }
      const ConformanceReport rep = run_conformance(*transport, conf_opts);
      for (const auto& c : rep.checks) {
        std::cout << fmt::format("{} {}{}\n", c.passed ? "PASS" : "FAIL", c.name, c.detail.empty() ? "" : ": " + c.detail);
      }
      std::cout << fmt::format("{} checks, {} violations\n", rep.checks.size(), rep.violations());
      return rep.ok() ? kExitOk : kExitInvalid;
    }
  } catch (const TrackingAbort& e) {
    std::cerr << "tracking aborted: " << e.what() << '\n';
    return kExitAbort;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitOk;
}
