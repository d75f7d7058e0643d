#include "zsmat/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "zsmat/errors.hpp"

namespace zsmat {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(fmt::format("config key '{}': '{}' is not a number", key, v));
  }
  return out;
}

int parse_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError(fmt::format("config key '{}': '{}' is not an integer", key, v));
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") {
    return true;
  }
  if (v == "false" || v == "0" || v == "off") {
    return false;
  }
  throw ConfigError(fmt::format("config key '{}': '{}' is not a boolean", key, v));
}

template <typename E>
E parse_enum(const std::string& key, const std::string& v, const std::map<std::string, E>& names) {
  auto it = names.find(v);
  if (it == names.end()) {
    std::vector<std::string> options;
    for (const auto& [n, e] : names) {
      options.push_back(n);
    }
    throw ConfigError(fmt::format("config key '{}': '{}' is not one of {}", key, v, fmt::join(options, "|")));
  }
  return it->second;
}

const std::map<std::string, ThresholdMode> kThresholdModes{{"adaptive", ThresholdMode::Adaptive},
                                                           {"fixed", ThresholdMode::Fixed}};
const std::map<std::string, ThresholdRule> kRules{{"boundary", ThresholdRule::ClusterBoundary},
                                                  {"centroid", ThresholdRule::WeightedCentroid}};
const std::map<std::string, InitRule> kInitRules{{"mask", InitRule::Mask}, {"box", InitRule::Box}};
const std::map<std::string, ReconstructionMode> kModes{{"off", ReconstructionMode::Off},
                                                       {"quality_band", ReconstructionMode::QualityBand},
                                                       {"density_aware", ReconstructionMode::DensityAware},
                                                       {"always", ReconstructionMode::Always}};

void apply(RunConfig& c, const std::string& k, const std::string& v) {
  auto& t = c.tracker;
  if (k == "delta") c.threshold.delta = parse_double(k, v);
  else if (k == "floor") c.threshold.floor = parse_double(k, v);
  else if (k == "fallback") c.threshold.fallback = parse_double(k, v);
  else if (k == "threshold_rule") c.threshold.rule = parse_enum(k, v, kRules);
  else if (k == "threshold") c.threshold_mode = parse_enum(k, v, kThresholdModes);
  else if (k == "fixed_threshold") c.fixed_threshold = parse_double(k, v);
  else if (k == "tau_mask") t.tau_mask = parse_double(k, v);
  else if (k == "tau_iou") t.tau_iou = parse_double(k, v);
  else if (k == "tau_reliable") t.tau_reliable = parse_double(k, v);
  else if (k == "tau_pending") t.tau_pending = parse_double(k, v);
  else if (k == "tau_lost") t.tau_lost = parse_double(k, v);
  else if (k == "n_lost") t.n_lost = parse_int(k, v);
  else if (k == "n_frames") t.n_frames = parse_int(k, v);
  else if (k == "tau_miou") t.tau_miou = parse_double(k, v);
  else if (k == "tau_dscore") t.tau_dscore = parse_double(k, v);
  else if (k == "tau_dstd") t.tau_dstd = parse_double(k, v);
  else if (k == "tau_nms") t.tau_nms = parse_double(k, v);
  else if (k == "match_floor") t.match_floor = parse_double(k, v);
  else if (k == "init_rule") t.init_rule = parse_enum(k, v, kInitRules);
  else if (k == "reconstruction") t.reconstruction = parse_enum(k, v, kModes);
  else if (k == "cross_object") t.cross_object = parse_bool(k, v);
  else if (k == "mask_nms") t.mask_nms = parse_bool(k, v);
  else if (k == "segmenter") c.segmenter = v;
  else if (k == "sequences") {
    c.sequences.clear();
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (auto s = trim(item); !s.empty()) {
        c.sequences.push_back(s);
      }
    }
  } else {
    throw std::out_of_range(k);
  }
}

template <typename E>
std::string name_of(E value, const std::map<std::string, E>& names) {
  for (const auto& [n, e] : names) {
    if (e == value) {
      return n;
    }
  }
  return "?";
}

}  // namespace

void RunConfig::validate() const {
  std::vector<std::string> bad;
  const auto& t = tracker;
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(threshold.delta)) bad.emplace_back("delta");
  if (!unit(threshold.floor)) bad.emplace_back("floor");
  if (!unit(threshold.fallback)) bad.emplace_back("fallback");
  if (!unit(fixed_threshold)) bad.emplace_back("fixed_threshold");
  if (!(t.tau_mask > 0.0 && t.tau_mask <= 1.0)) bad.emplace_back("tau_mask");
  if (!unit(t.tau_iou)) bad.emplace_back("tau_iou");
  if (!(t.tau_reliable > t.tau_pending)) {
    bad.emplace_back("tau_reliable");
    bad.emplace_back("tau_pending");
  }
  if (!(t.tau_pending > t.tau_lost)) {
    if (bad.empty() || bad.back() != "tau_pending") bad.emplace_back("tau_pending");
    bad.emplace_back("tau_lost");
  }
  if (t.n_lost < 1) bad.emplace_back("n_lost");
  if (t.n_frames < 1) bad.emplace_back("n_frames");
  if (!unit(t.tau_miou)) bad.emplace_back("tau_miou");
  if (!(t.tau_dscore >= 0.0)) bad.emplace_back("tau_dscore");
  if (!(t.tau_dstd >= 0.0)) bad.emplace_back("tau_dstd");
  if (!unit(t.tau_nms)) bad.emplace_back("tau_nms");
  if (!unit(t.match_floor)) bad.emplace_back("match_floor");
  if (segmenter.empty()) bad.emplace_back("segmenter");
  if (!bad.empty()) {
    throw ConfigError(fmt::format("invalid configuration values for: {}", fmt::join(bad, ", ")));
  }
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::vector<std::string> unknown;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    const std::string body = trim(line);
    if (body.empty()) {
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("config line {}: expected 'key = value'", line_no));
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (!seen.insert(key).second) {
      throw ConfigError(fmt::format("config line {}: key '{}' given twice", line_no, key));
    }
    try {
      apply(cfg, key, value);
    } catch (const std::out_of_range&) {
      unknown.push_back(key);
    }
  }
  if (!unknown.empty()) {
    throw ConfigError(fmt::format("unknown config keys: {}", fmt::join(unknown, ", ")));
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(fmt::format("cannot read config file '{}'", path));
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_text(const RunConfig& c) {
  const auto& t = c.tracker;
  std::string out;
  auto put = [&](const char* key, const std::string& v) { out += fmt::format("{} = {}\n", key, v); };
  put("delta", fmt::format("{}", c.threshold.delta));
  put("floor", fmt::format("{}", c.threshold.floor));
  put("fallback", fmt::format("{}", c.threshold.fallback));
  put("threshold_rule", name_of(c.threshold.rule, kRules));
  put("threshold", name_of(c.threshold_mode, kThresholdModes));
  put("fixed_threshold", fmt::format("{}", c.fixed_threshold));
  put("tau_mask", fmt::format("{}", t.tau_mask));
  put("tau_iou", fmt::format("{}", t.tau_iou));
  put("tau_reliable", fmt::format("{}", t.tau_reliable));
  put("tau_pending", fmt::format("{}", t.tau_pending));
  put("tau_lost", fmt::format("{}", t.tau_lost));
  put("n_lost", fmt::format("{}", t.n_lost));
  put("n_frames", fmt::format("{}", t.n_frames));
  put("tau_miou", fmt::format("{}", t.tau_miou));
  put("tau_dscore", fmt::format("{}", t.tau_dscore));
  put("tau_dstd", fmt::format("{}", t.tau_dstd));
  put("tau_nms", fmt::format("{}", t.tau_nms));
  put("match_floor", fmt::format("{}", t.match_floor));
  put("init_rule", name_of(t.init_rule, kInitRules));
  put("reconstruction", name_of(t.reconstruction, kModes));
  put("cross_object", t.cross_object ? "true" : "false");
  put("mask_nms", t.mask_nms ? "true" : "false");
  put("segmenter", c.segmenter);
  if (!c.sequences.empty()) {
    put("sequences", fmt::format("{}", fmt::join(c.sequences, ",")));
  }
  return out;
}

}  // namespace zsmat
