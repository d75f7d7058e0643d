#include "zsmat/report.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "json.hpp"
#include "zsmat/errors.hpp"
#include "zsmat/io.hpp"

namespace zsmat {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const std::vector<std::string> kColumns{"HOTA", "DetA", "AssA", "DetRe", "LocA", "MOTA", "IDF1", "IDSW"};
const std::vector<std::string> kEventKinds{"Created", "Rejected", "Reprompted", "MemoryDropped", "Suppressed",
                                           "Terminated"};

json metrics_json(const SequenceEval& e) {
  return json{{"HOTA", e.hota}, {"DetA", e.deta}, {"AssA", e.assa}, {"DetRe", e.detre}, {"DetPr", e.detpr},
              {"LocA", e.loca}, {"MOTA", e.mota}, {"IDF1", e.idf1}, {"IDSW", e.idsw},  {"GT", e.gt_dets},
              {"Pred", e.pred_dets}};
}

std::string table_row(const std::string& name, const SequenceEval& e) {
  return fmt::format("{:<20} {:>7.3f} {:>7.3f} {:>7.3f} {:>7.3f} {:>7.3f} {:>7.3f} {:>7.3f} {:>6}\n", name, e.hota,
                     e.deta, e.assa, e.detre, e.loca, e.mota, e.idf1, e.idsw);
}

SequenceEval combined(const EvalRows& rows) {
  std::vector<SequenceEval> evals;
  for (const auto& [n, e] : rows) {
    evals.push_back(e);
  }
  return aggregate(evals);
}

}  // namespace

std::string eval_table_text(const EvalRows& rows) {
  std::string out = fmt::format("{:<20} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7} {:>6}\n", "sequence", "HOTA", "DetA",
                                "AssA", "DetRe", "LocA", "MOTA", "IDF1", "IDSW");
  for (const auto& [name, e] : rows) {
    out += table_row(name, e);
  }
  out += table_row("COMBINED", combined(rows));
  return out;
}

std::string eval_to_json(const EvalRows& rows) {
  json seqs = json::object();
  for (const auto& [name, e] : rows) {
    seqs[name] = metrics_json(e);
  }
  return json{{"columns", kColumns}, {"sequences", seqs}, {"combined", metrics_json(combined(rows))}}.dump(2);
}

MetricRow combined_from_eval_json(const std::string& text, const std::string& source) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ValidationError(fmt::format("{}: not a JSON object", source));
  }
  try {
    const auto& c = j.at("combined");
    return MetricRow{c.at("HOTA").get<double>(),  c.at("DetA").get<double>(), c.at("AssA").get<double>(),
                     c.at("DetRe").get<double>(), c.at("LocA").get<double>(), c.at("MOTA").get<double>(),
                     c.at("IDF1").get<double>(),  c.at("IDSW").get<long>()};
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("{}: {}", source, e.what()));
  }
}

ReportTables build_report(const std::vector<std::string>& result_dirs) {
  if (result_dirs.empty()) {
    throw ValidationError("report needs at least one results directory");
  }
  std::vector<std::string> missing;
  struct Variant {
    std::string name;
    fs::path dir;
    std::vector<std::string> sequences;
  };
  std::vector<Variant> variants;
  for (const auto& d : result_dirs) {
    fs::path dir(d);
    Variant v{dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string(), dir, {}};
    if (!fs::is_directory(dir)) {
      missing.push_back(d);
      continue;
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      const std::string suffix = ".threshold.json";
      if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
        v.sequences.push_back(name.substr(0, name.size() - suffix.size()));
      }
    }
    std::sort(v.sequences.begin(), v.sequences.end());
    if (v.sequences.empty()) {
      missing.push_back((dir / "<sequence>.threshold.json").string());
    }
    for (const auto& s : v.sequences) {
      if (!fs::exists(dir / (s + ".events.jsonl"))) {
        missing.push_back((dir / (s + ".events.jsonl")).string());
      }
    }
    if (!fs::exists(dir / "eval.json")) {
      missing.push_back((dir / "eval.json").string());
    }
    variants.push_back(std::move(v));
  }
  if (!missing.empty()) {
    throw ValidationError(fmt::format("report inputs missing: {}", fmt::join(missing, ", ")));
  }

  ReportTables t;
  t.histograms_csv = "variant,sequence,bin_lo,bin_hi,count,cluster,tau\n";
  t.thresholds_csv = "variant,sequence,mode,tau,mu1,mu2,n1,n2\n";
  t.ablation_csv = fmt::format("variant,{},{}\n", fmt::join(kColumns, ","), fmt::join(kEventKinds, ","));
  for (const auto& v : variants) {
    std::map<std::string, long> events;
    for (const auto& s : v.sequences) {
      const auto path = (v.dir / (s + ".threshold.json")).string();
      const auto summary = threshold_summary_from_json(read_file(path), path);
      for (const auto& b : summary.histogram) {
        t.histograms_csv += fmt::format("{},{},{},{},{},{},{}\n", v.name, summary.sequence, b.lo, b.hi, b.count,
                                        b.cluster, summary.result.tau);
      }
      const auto& c = summary.result.clusters;
      t.thresholds_csv += fmt::format("{},{},{},{},{},{},{},{}\n", v.name, summary.sequence,
                                      summary.adaptive ? "adaptive" : "fixed", summary.result.tau, c.mu1, c.mu2, c.n1,
                                      c.n2);
      std::ifstream in(v.dir / (s + ".events.jsonl"));
      std::string line;
      int line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
          continue;
        }
        const json e = json::parse(line, nullptr, false);
        if (e.is_discarded() || !e.contains("event") || !e.at("event").is_string()) {
          throw ValidationError(fmt::format("{}:{}: malformed event", (v.dir / (s + ".events.jsonl")).string(), line_no));
        }
        ++events[e.at("event").get<std::string>()];
      }
    }
    const auto eval_path = (v.dir / "eval.json").string();
    const auto m = combined_from_eval_json(read_file(eval_path), eval_path);
    std::vector<long> counts;
    for (const auto& k : kEventKinds) {
      counts.push_back(events[k]);
    }
    t.ablation_csv += fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{},{}\n", v.name, m.hota, m.deta,
                                  m.assa, m.detre, m.loca, m.mota, m.idf1, m.idsw, fmt::join(counts, ","));
  }
  return t;
}

}  // namespace zsmat
