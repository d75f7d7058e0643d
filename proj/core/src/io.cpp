#include "zsmat/io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <cmath>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"
#include "zsmat/errors.hpp"

namespace zsmat {

using json = nlohmann::json;

namespace {

[[noreturn]] void fail_at(const std::string& source, int line, const std::string& what) {
  throw ValidationError(fmt::format("{}:{}: {}", source, line, what));
}

const json& field(const json& obj, const char* name, const std::string& source, int line) {
  if (!obj.is_object() || !obj.contains(name)) {
    fail_at(source, line, fmt::format("missing field '{}'", name));
  }
  return obj.at(name);
}

double number(const json& v, const char* name, const std::string& source, int line) {
  if (!v.is_number()) {
    fail_at(source, line, fmt::format("field '{}' must be a number", name));
  }
  return v.get<double>();
}

}  // namespace

DetectionSequence parse_detections(std::istream& in, const std::string& source) {
  DetectionSequence out;
  std::string line;
  int line_no = 0;
  int last_frame = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    const json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) {
      fail_at(source, line_no, "not a JSON object");
    }
    const json& fj = field(rec, "frame", source, line_no);
    if (!fj.is_number_integer() || fj.get<long long>() < 0) {
      fail_at(source, line_no, "field 'frame' must be a non-negative integer");
    }
    const int frame = fj.get<int>();
    if (frame <= last_frame) {
      fail_at(source, line_no, fmt::format("frame {} does not increase (previous {})", frame, last_frame));
    }
    last_frame = frame;
    const json& dets = field(rec, "detections", source, line_no);
    if (!dets.is_array()) {
      fail_at(source, line_no, "field 'detections' must be an array");
    }
    out.resize(static_cast<std::size_t>(frame) + 1);
    auto& bucket = out[static_cast<std::size_t>(frame)];
    for (const auto& d : dets) {
      const json& b = field(d, "bbox", source, line_no);
      if (!b.is_array() || b.size() != 4) {
        fail_at(source, line_no, "bbox must be [x, y, w, h]");
      }
      BBox box{number(b[0], "bbox", source, line_no), number(b[1], "bbox", source, line_no),
               number(b[2], "bbox", source, line_no), number(b[3], "bbox", source, line_no)};
      if (!box.is_valid()) {
        fail_at(source, line_no, "bbox needs finite coordinates and positive size");
      }
      const double score = number(field(d, "score", source, line_no), "score", source, line_no);
      if (!(score >= 0.0 && score <= 1.0)) {
        fail_at(source, line_no, fmt::format("score {} outside [0, 1]", score));
      }
      std::string label;
      if (d.contains("label")) {
        if (!d.at("label").is_string()) {
          fail_at(source, line_no, "field 'label' must be a string");
        }
        label = d.at("label").get<std::string>();
      }
      bucket.push_back(Detection{frame, box, score, label});
    }
  }
  return out;
}

DetectionSequence load_detections(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError(fmt::format("cannot read detections file '{}'", path));
  }
  return parse_detections(in, path);
}

void write_detections(std::ostream& out, const DetectionSequence& detections) {
  for (std::size_t f = 0; f < detections.size(); ++f) {
    json dets = json::array();
    for (const auto& d : detections[f]) {
      dets.push_back(json{{"bbox", {d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h}}, {"score", d.score}, {"label", d.label}});
    }
    out << json{{"frame", f}, {"detections", dets}}.dump() << '\n';
  }
}

TrackTable parse_mot(std::istream& in, const std::string& source) {
  TrackTable table;
  std::set<std::pair<int, int>> keys;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.find_first_not_of(" \t") == std::string::npos) {
      continue;
    }
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cols.push_back(cell);
    }
    if (cols.size() < 6) {
      fail_at(source, line_no, fmt::format("expected at least 6 columns, got {}", cols.size()));
    }
    auto num = [&](std::size_t i) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cols[i], &used);
        if (cols[i].find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v)) {
          throw std::invalid_argument("trailing");
        }
        return v;
      } catch (const std::exception&) {
        fail_at(source, line_no, fmt::format("column {} ('{}') is not a number", i + 1, cols[i]));
      }
    };
    const double frame = num(0);
    const double id = num(1);
    if (frame < 1 || frame != std::floor(frame) || id != std::floor(id)) {
      fail_at(source, line_no, "frame must be an integer >= 1 and id an integer");
    }
    TrackRow row;
    row.frame = static_cast<int>(frame) - 1;
    row.id = static_cast<int>(id);
    row.box = BBox{num(2), num(3), num(4), num(5)};
    if (!row.box.is_valid()) {
      fail_at(source, line_no, "box needs positive width and height");
    }
    if (cols.size() > 6) row.conf = num(6);
    if (cols.size() > 7) row.cls = static_cast<int>(num(7));
    if (cols.size() > 8) row.visibility = num(8);
    if (!keys.emplace(row.frame, row.id).second) {
      fail_at(source, line_no, fmt::format("duplicate id {} in frame {}", row.id, row.frame + 1));
    }
    table.push_back(row);
  }
  return table;
}

TrackTable load_mot(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError(fmt::format("cannot read MOT file '{}'", path));
  }
  return parse_mot(in, path);
}

void write_mot(std::ostream& out, const TrackTable& table) {
  for (const auto& r : table) {
    out << fmt::format("{},{},{},{},{},{},{},{},{}\n", r.frame + 1, r.id, r.box.x, r.box.y, r.box.w, r.box.h, r.conf,
                       r.cls, r.visibility);
  }
}

std::string event_to_json(const TrackEvent& e) {
  json j{{"frame", e.frame}, {"event", to_string(e.kind)}, {"track_id", e.track_id}, {"reason", e.reason},
         {"value", e.value}};
  if (e.other_id >= 0) {
    j["other_id"] = e.other_id;
  }
  if (e.box) {
    j["bbox"] = {e.box->x, e.box->y, e.box->w, e.box->h};
  }
  return j.dump();
}

void write_events(std::ostream& out, const std::vector<TrackEvent>& events) {
  for (const auto& e : events) {
    out << event_to_json(e) << '\n';
  }
}

std::string threshold_summary_to_json(const ThresholdSummary& s) {
  json bins = json::array();
  for (const auto& b : s.histogram) {
    bins.push_back(json{{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}, {"cluster", b.cluster}});
  }
  const auto& c = s.result.clusters;
  return json{{"sequence", s.sequence},
              {"mode", s.adaptive ? "adaptive" : "fixed"},
              {"tau", s.result.tau},
              {"clustered", s.result.clustered},
              {"admitted", s.result.admitted},
              {"mu1", c.mu1},
              {"mu2", c.mu2},
              {"n1", c.n1},
              {"n2", c.n2},
              {"histogram", bins}}
      .dump(2);
}

ThresholdSummary threshold_summary_from_json(const std::string& text, const std::string& source) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ValidationError(fmt::format("{}: not a JSON object", source));
  }
  ThresholdSummary s;
  try {
    s.sequence = j.at("sequence").get<std::string>();
    s.adaptive = j.at("mode").get<std::string>() == "adaptive";
    s.result.tau = j.at("tau").get<double>();
    s.result.clustered = j.at("clustered").get<bool>();
    s.result.admitted = j.at("admitted").get<std::size_t>();
    s.result.clusters.mu1 = j.at("mu1").get<double>();
    s.result.clusters.mu2 = j.at("mu2").get<double>();
    s.result.clusters.n1 = j.at("n1").get<std::size_t>();
    s.result.clusters.n2 = j.at("n2").get<std::size_t>();
    for (const auto& b : j.at("histogram")) {
      s.histogram.push_back(HistogramBin{b.at("lo").get<double>(), b.at("hi").get<double>(),
                                         b.at("count").get<std::size_t>(), b.at("cluster").get<int>()});
    }
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("{}: {}", source, e.what()));
  }
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError(fmt::format("cannot read '{}'", path));
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << content)) {
    throw ValidationError(fmt::format("cannot write '{}'", path));
  }
}

}  // namespace zsmat
