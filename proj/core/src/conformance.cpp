#include "zsmat/conformance.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

namespace zsmat {

std::size_t ConformanceReport::violations() const {
  return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const auto& c) { return !c.passed; }));
}

namespace {

class Transcript {
 public:
  Transcript(LineTransport& transport, const ConformanceOptions& options, ConformanceReport& report)
      : transport_(transport), options_(options), report_(report) {}

  // Sends a raw line; a reply that fails to decode is a violation and yields nullopt.
  std::optional<SegmenterResponse> send_raw(const std::string& name, const std::string& line) {
    std::string reply;
    try {
      reply = transport_.exchange(line);
    } catch (const std::exception& e) {
      fail(name, fmt::format("transport failure: {}", e.what()));
      return std::nullopt;
    }
    try {
      return decode_response(reply);
    } catch (const std::exception& e) {
      fail(name, fmt::format("response is not schema-valid ({}): {}", e.what(), reply));
      return std::nullopt;
    }
  }

  std::optional<SegmenterResponse> send(const std::string& name, const SegmenterRequest& r) {
    return send_raw(name, encode_request(r));
  }

  void pass(const std::string& name) { report_.checks.push_back({name, true, {}}); }
  void fail(const std::string& name, std::string detail) { report_.checks.push_back({name, false, std::move(detail)}); }
  void expect(const std::string& name, bool ok, std::string detail) {
    if (ok) {
      pass(name);
    } else {
      fail(name, std::move(detail));
    }
  }

  bool masks_valid(const SegmenterResponse& r, std::string& why) const {
    for (const auto& e : r.entries) {
      if (e.mask.width() != options_.width || e.mask.height() != options_.height) {
        why = fmt::format("track {} mask is {}x{}", e.track_id, e.mask.width(), e.mask.height());
        return false;
      }
      if (!e.occ.is_finite()) {
        why = fmt::format("track {} occ is not finite", e.track_id);
        return false;
      }
    }
    return true;
  }

  void check_propagate(const std::string& name, int frame, const std::set<int>& active) {
    SegmenterRequest r;
    r.kind = RequestKind::Propagate;
    r.frame = frame;
    auto resp = send(name, r);
    if (!resp) {
      return;
    }
    if (resp->error) {
      fail(name, fmt::format("unexpected error: {}", *resp->error));
      return;
    }
    std::set<int> ids;
    for (const auto& e : resp->entries) {
      if (!ids.insert(e.track_id).second) {
        fail(name, fmt::format("track {} returned twice", e.track_id));
        return;
      }
    }
    std::string why;
    if (ids != active) {
      fail(name, fmt::format("expected {} entries (one per active track), got {}", active.size(), ids.size()));
    } else if (resp->frame != frame) {
      fail(name, fmt::format("response frame {} != request frame {}", resp->frame, frame));
    } else if (!masks_valid(*resp, why)) {
      fail(name, why);
    } else {
      pass(name);
    }
  }

  void check_prompt(const std::string& name, int frame, int track_id, const BBox& box) {
    SegmenterRequest r;
    r.kind = RequestKind::Prompt;
    r.frame = frame;
    r.track_id = track_id;
    r.bbox = box;
    auto resp = send(name, r);
    if (!resp) {
      return;
    }
    std::string why;
    if (resp->error) {
      fail(name, fmt::format("unexpected error: {}", *resp->error));
    } else if (resp->entries.size() != 1 || resp->entries[0].track_id != track_id) {
      fail(name, fmt::format("Prompt must return exactly one entry for track {}", track_id));
    } else if (!masks_valid(*resp, why)) {
      fail(name, why);
    } else {
      pass(name);
    }
  }

  void check_error(const std::string& name, const std::string& line) {
    auto resp = send_raw(name, line);
    if (!resp) {
      return;
    }
    expect(name, resp->error.has_value() && resp->entries.empty(), "request must be rejected with an error response");
  }

 private:
  LineTransport& transport_;
  const ConformanceOptions& options_;
  ConformanceReport& report_;
};

BBox random_box(std::mt19937_64& rng, int width, int height) {
  std::uniform_real_distribution<double> uw(4.0, std::max(5.0, width / 2.0));
  std::uniform_real_distribution<double> uh(4.0, std::max(5.0, height / 2.0));
  const double w = uw(rng);
  const double h = uh(rng);
  std::uniform_real_distribution<double> ux(0.0, std::max(1.0, width - w));
  std::uniform_real_distribution<double> uy(0.0, std::max(1.0, height - h));
  return BBox{ux(rng), uy(rng), w, h};
}

SegmenterRequest propagate_request(int frame) {
  SegmenterRequest r;
  r.kind = RequestKind::Propagate;
  r.frame = frame;
  return r;
}

}  // namespace

ConformanceReport run_conformance(LineTransport& transport, const ConformanceOptions& options) {
  if (options.frames < 6) {
    throw std::invalid_argument("conformance transcript needs at least 6 frames");
  }
  ConformanceReport report;
  Transcript t(transport, options, report);
  std::mt19937_64 rng(options.seed);

  SegmenterRequest open;
  open.kind = RequestKind::OpenSequence;
  open.sequence_id = options.sequence_id;
  open.width = options.width;
  open.height = options.height;
  open.frames = options.frames;
  if (auto r = t.send("handshake", open)) {
    t.expect("handshake", !r->error && r->entries.empty(), r->error.value_or("OpenSequence must not return entries"));
  }

  std::set<int> active;
  t.check_propagate("propagate_without_tracks", 0, active);

  const BBox centre{options.width * 0.25, options.height * 0.25, options.width * 0.5, options.height * 0.5};
  t.check_prompt("prompt_single_entry", 0, 1, centre);
  active.insert(1);
  t.check_error("prompt_wrong_frame_rejected",
                encode_request(SegmenterRequest{RequestKind::Prompt, 5, 2, centre, {}, kProtocolVersion, 0, 0, 0}));

  t.check_propagate("propagate_one_entry_per_track", 1, active);
  t.check_error("frame_skip_rejected", encode_request(propagate_request(3)));
  t.check_error("frame_repeat_rejected", encode_request(propagate_request(1)));
  t.check_propagate("state_unchanged_after_rejection", 2, active);

  SegmenterRequest drop;
  drop.kind = RequestKind::DropMemory;
  drop.frame = 2;
  drop.track_id = 1;
  auto first = t.send("drop_memory", drop);
  auto second = t.send("drop_memory_idempotent", drop);
  if (first && second) {
    t.expect("drop_memory", !first->error, first->error.value_or(""));
    t.expect("drop_memory_idempotent", !second->error && second->entries == first->entries,
             "second identical DropMemory must be acknowledged like the first");
  }
  drop.track_id = 987654;
  if (auto r = t.send("drop_unknown_track_ignored", drop)) {
    t.expect("drop_unknown_track_ignored", !r->error && r->entries.empty(),
             r->error.value_or("DropMemory must not return entries"));
  }

  t.check_error("malformed_line_rejected", "{\"kind\": \"Propagate\", \"frame\": ");
  t.check_error("unknown_kind_rejected", R"({"kind":"Teleport","frame":3})");
  t.check_error("mistyped_field_rejected", R"({"kind":"Propagate","frame":"three"})");
  t.check_propagate("session_survives_malformed_lines", 3, active);

  // Seeded fuzz over the remaining frames: new prompts, re-prompts, drops, propagates.
  int frame = 3;
  int next_id = 2;
  std::uniform_int_distribution<int> action(0, 3);
  for (int step = 0; step < options.fuzz_steps && frame + 1 < options.frames; ++step) {
    const int a = action(rng);
    if (a == 0) {
      t.check_prompt(fmt::format("fuzz_{}_prompt_new", step), frame, next_id, random_box(rng, options.width, options.height));
      active.insert(next_id++);
    } else if (a == 1 && !active.empty()) {
      auto it = active.begin();
      std::advance(it, std::uniform_int_distribution<std::size_t>(0, active.size() - 1)(rng));
      t.check_prompt(fmt::format("fuzz_{}_reprompt", step), frame, *it, random_box(rng, options.width, options.height));
    } else if (a == 2 && !active.empty()) {
      SegmenterRequest d;
      d.kind = RequestKind::DropMemory;
      d.frame = frame;
      d.track_id = *active.begin();
      if (auto r = t.send(fmt::format("fuzz_{}_drop", step), d)) {
        t.expect(fmt::format("fuzz_{}_drop", step), !r->error && r->entries.empty(), r->error.value_or("entries"));
      }
    } else {
      ++frame;
      t.check_propagate(fmt::format("fuzz_{}_propagate", step), frame, active);
    }
  }

  SegmenterRequest close;
  close.kind = RequestKind::CloseSequence;
  if (auto r = t.send("close_sequence", close)) {
    t.expect("close_sequence", !r->error, r->error.value_or(""));
  }
  return report;
}

}  // namespace zsmat
