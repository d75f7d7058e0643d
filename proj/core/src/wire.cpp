#include "zsmat/wire.hpp"

#include <istream>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "json.hpp"
#include "zsmat/errors.hpp"

namespace zsmat {

using json = nlohmann::json;

namespace {

json parse_object(std::string_view line) {
  json j = json::parse(line.begin(), line.end(), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    throw ProtocolError("message is not valid JSON");
  }
  if (!j.is_object()) {
    throw ProtocolError("message must be a JSON object");
  }
  return j;
}

int get_int(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw ProtocolError(fmt::format("missing field '{}'", key));
  }
  if (!it->is_number_integer()) {
    throw ProtocolError(fmt::format("field '{}' must be an integer", key));
  }
  return it->get<int>();
}

double get_number(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw ProtocolError(fmt::format("missing field '{}'", key));
  }
  if (!it->is_number()) {
    throw ProtocolError(fmt::format("field '{}' must be a number", key));
  }
  return it->get<double>();
}

std::string get_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw ProtocolError(fmt::format("missing field '{}'", key));
  }
  if (!it->is_string()) {
    throw ProtocolError(fmt::format("field '{}' must be a string", key));
  }
  return it->get<std::string>();
}

BBox get_bbox(const json& j) {
  auto it = j.find("bbox");
  if (it == j.end()) {
    throw ProtocolError("missing field 'bbox'");
  }
  if (!it->is_array() || it->size() != 4) {
    throw ProtocolError("field 'bbox' must be [x, y, w, h]");
  }
  for (const auto& v : *it) {
    if (!v.is_number()) {
      throw ProtocolError("field 'bbox' must hold numbers");
    }
  }
  BBox box{(*it)[0].get<double>(), (*it)[1].get<double>(), (*it)[2].get<double>(), (*it)[3].get<double>()};
  if (!box.is_valid()) {
    throw ProtocolError("bbox must have positive width and height");
  }
  return box;
}

json mask_to_json(const BitMask& m) {
  return json{{"width", m.width()}, {"height", m.height()}, {"runs", m.runs()}};
}

BitMask mask_from_json(const json& j) {
  if (!j.is_object()) {
    throw ProtocolError("mask must be an object");
  }
  const int w = get_int(j, "width");
  const int h = get_int(j, "height");
  auto it = j.find("runs");
  if (it == j.end() || !it->is_array()) {
    throw ProtocolError("mask field 'runs' must be an array");
  }
  std::vector<BitMask::Run> runs;
  runs.reserve(it->size());
  for (const auto& v : *it) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw ProtocolError("mask runs must be non-negative integers");
    }
    runs.push_back(v.get<BitMask::Run>());
  }
  try {
    return BitMask::from_runs(w, h, std::move(runs));
  } catch (const ValidationError& e) {
    throw ProtocolError(e.what());
  }
}

}  // namespace

std::string encode_request(const SegmenterRequest& r) {
  json j;
  j["kind"] = to_string(r.kind);
  switch (r.kind) {
    case RequestKind::OpenSequence:
      j["sequence_id"] = r.sequence_id;
      j["protocol"] = r.protocol;
      j["width"] = r.width;
      j["height"] = r.height;
      j["frames"] = r.frames;
      break;
    case RequestKind::Prompt: {
      j["frame"] = r.frame;
      j["track_id"] = r.track_id;
      const BBox b = r.bbox.value_or(BBox{});
      j["bbox"] = {b.x, b.y, b.w, b.h};
      break;
    }
    case RequestKind::Propagate:
      j["frame"] = r.frame;
      break;
    case RequestKind::DropMemory:
      j["frame"] = r.frame;
      j["track_id"] = r.track_id;
      break;
    case RequestKind::CloseSequence:
      break;
  }
  return j.dump();
}

SegmenterRequest decode_request(std::string_view line) {
  const json j = parse_object(line);
  SegmenterRequest r;
  r.kind = request_kind_from_string(get_string(j, "kind"));
  switch (r.kind) {
    case RequestKind::OpenSequence:
      r.sequence_id = get_string(j, "sequence_id");
      r.protocol = get_int(j, "protocol");
      r.width = get_int(j, "width");
      r.height = get_int(j, "height");
      r.frames = get_int(j, "frames");
      break;
    case RequestKind::Prompt:
      r.frame = get_int(j, "frame");
      r.track_id = get_int(j, "track_id");
      r.bbox = get_bbox(j);
      break;
    case RequestKind::Propagate:
      r.frame = get_int(j, "frame");
      break;
    case RequestKind::DropMemory:
      r.frame = get_int(j, "frame");
      r.track_id = get_int(j, "track_id");
      break;
    case RequestKind::CloseSequence:
      break;
  }
  return r;
}

std::string encode_response(const SegmenterResponse& r) {
  json j;
  j["frame"] = r.frame;
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back(json{{"track_id", e.track_id}, {"mask", mask_to_json(e.mask)}, {"occ", e.occ.value}});
  }
  j["entries"] = std::move(entries);
  if (r.error) {
    j["error"] = *r.error;
  }
  if (r.warning) {
    j["warning"] = *r.warning;
  }
  return j.dump();
}

SegmenterResponse decode_response(std::string_view line) {
  const json j = parse_object(line);
  SegmenterResponse r;
  r.frame = get_int(j, "frame");
  auto it = j.find("entries");
  if (it == j.end() || !it->is_array()) {
    throw ProtocolError("response field 'entries' must be an array");
  }
  for (const auto& e : *it) {
    if (!e.is_object()) {
      throw ProtocolError("response entries must be objects");
    }
    MaskEntry entry;
    entry.track_id = get_int(e, "track_id");
    auto m = e.find("mask");
    if (m == e.end()) {
      throw ProtocolError("missing field 'mask'");
    }
    entry.mask = mask_from_json(*m);
    entry.occ = OcclusionScore{get_number(e, "occ")};
    if (!entry.occ.is_finite()) {
      throw ProtocolError("occ must be finite");
    }
    r.entries.push_back(std::move(entry));
  }
  if (auto e = j.find("error"); e != j.end() && !e->is_null()) {
    r.error = get_string(j, "error");
  }
  if (auto w = j.find("warning"); w != j.end() && !w->is_null()) {
    r.warning = get_string(j, "warning");
  }
  return r;
}

WireSession::WireSession(std::unique_ptr<LineTransport> transport) : transport_(std::move(transport)) {}

SegmenterResponse WireSession::call(const SegmenterRequest& request) {
  const std::string reply = transport_->exchange(encode_request(request));
  SegmenterResponse response = decode_response(reply);
  if (response.error) {
    throw ProtocolError(fmt::format("segmenter rejected {}: {}", to_string(request.kind), *response.error));
  }
  return response;
}

void WireSession::check_mask(const MaskEntry& entry) const {
  if (entry.mask.width() != info_.width || entry.mask.height() != info_.height) {
    throw ProtocolError(fmt::format("mask for track {} is {}x{}, sequence is {}x{}", entry.track_id,
                                    entry.mask.width(), entry.mask.height(), info_.width, info_.height));
  }
}

void WireSession::open(const SequenceInfo& info) {
  SegmenterRequest r;
  r.kind = RequestKind::OpenSequence;
  r.sequence_id = info.sequence_id;
  r.width = info.width;
  r.height = info.height;
  r.frames = info.frames;
  call(r);
  info_ = info;
}

MaskEntry WireSession::prompt(int frame, int track_id, const BBox& box) {
  SegmenterRequest r;
  r.kind = RequestKind::Prompt;
  r.frame = frame;
  r.track_id = track_id;
  r.bbox = box;
  auto response = call(r);
  if (response.entries.size() != 1 || response.entries[0].track_id != track_id) {
    throw ProtocolError(fmt::format("Prompt for track {} must return exactly that track", track_id));
  }
  check_mask(response.entries[0]);
  return std::move(response.entries[0]);
}

std::vector<MaskEntry> WireSession::propagate(int frame) {
  SegmenterRequest r;
  r.kind = RequestKind::Propagate;
  r.frame = frame;
  auto response = call(r);
  std::set<int> seen;
  for (const auto& e : response.entries) {
    if (!seen.insert(e.track_id).second) {
      throw ProtocolError(fmt::format("Propagate returned track {} twice", e.track_id));
    }
    check_mask(e);
  }
  return std::move(response.entries);
}

DropAck WireSession::drop_memory(int track_id, int frame) {
  SegmenterRequest r;
  r.kind = RequestKind::DropMemory;
  r.frame = frame;
  r.track_id = track_id;
  const auto response = call(r);
  return DropAck{!response.warning.has_value(), false};
}

void WireSession::close() {
  SegmenterRequest r;
  r.kind = RequestKind::CloseSequence;
  call(r);
}

SegmenterServer::SegmenterServer(SessionFactory factory) : factory_(std::move(factory)) {}

std::string SegmenterServer::handle_line(std::string_view line) {
  SegmenterRequest request;
  try {
    request = decode_request(line);
  } catch (const std::exception& e) {
    SegmenterResponse bad;
    bad.frame = -1;
    // Echo the frame when the line is JSON with an integer frame.
    const json j = json::parse(line.begin(), line.end(), nullptr, false);
    if (j.is_object() && j.contains("frame") && j["frame"].is_number_integer()) {
      bad.frame = j["frame"].get<int>();
    }
    bad.error = e.what();
    return encode_response(bad);
  }
  if (!session_) {
    session_ = factory_();
  }
  const SegmenterResponse response = dispatch(*session_, request);
  if (request.kind == RequestKind::CloseSequence && !response.error) {
    finished_ = true;
    session_.reset();
  } else {
    finished_ = false;
  }
  return encode_response(response);
}

void serve_stream(SegmenterServer& server, std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    out << server.handle_line(line) << '\n';
    out.flush();
    if (server.finished()) {
      break;
    }
  }
}

}  // namespace zsmat
